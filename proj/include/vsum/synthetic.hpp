#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vsum/dataio.hpp"

namespace vsum {

// Planted-structure videos. Each video is a run of scenes; a scene's frames
// are its base vector plus small noise. A fraction of frames is overwritten
// by short runs of "anchor" frames, exact copies of prototypes from a pool
// shared by all videos. Anchors cannot be predicted from their neighbours,
// so a reconstruction-based reward favours keeping them.
struct SyntheticOptions {
  std::size_t videos = 8;
  std::size_t frames = 256;
  std::size_t dim = 16;
  double anchor_fraction = 0.2;
  std::size_t anchor_run_min = 2;
  std::size_t anchor_run_max = 4;
  std::size_t prototypes = 6;
  std::size_t scene_min = 24;
  std::size_t scene_max = 48;
  double noise = 0.05;
  std::size_t users = 3;
  // Probability that a user flips a frame's label when deriving summaries.
  double user_noise = 0.05;
  std::uint64_t seed = 7;
};

struct SyntheticVideo {
  std::string video_id;
  Matrix<float> embeddings;
  std::vector<std::uint8_t> anchors;
  Annotation annotation;  // user summaries, importances, scene boundaries
};

std::vector<SyntheticVideo> make_planted_dataset(const SyntheticOptions& options);

// Writes embeddings, annotations, a manifest (manifest.json) and a fold file
// (folds.json, min(5, videos) round-robin folds) under `dir`. Returns the
// manifest path.
std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir,
                                              const std::vector<SyntheticVideo>& videos,
                                              const std::string& name = "synthetic",
                                              Reduction reduction = Reduction::kAverage);

}  // namespace vsum
