#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vsum/matrix.hpp"

namespace vsum {

// A video as a T x d matrix of frame embeddings; row t is frame t.
struct FrameEmbeddingSequence {
  std::string video_id;
  Matrix<float> data;

  std::size_t frames() const { return data.rows(); }
  std::size_t dim() const { return data.cols(); }
};

struct Annotation {
  std::string video_id;
  // One 0/1 sequence of length T per user. Stored as int so that malformed
  // entries survive loading and are reported by validate_dataset().
  std::vector<std::vector<int>> user_summaries;
  // Per-user frame-level importance scores; empty when not annotated.
  std::vector<std::vector<double>> frame_importances;
  // Optional precomputed shot start indices (first must be 0).
  std::vector<std::size_t> shot_boundaries;
};

enum class Reduction { kAverage, kMaximum };

std::string reduction_name(Reduction r);
Reduction parse_reduction(const std::string& s);

struct VideoEntry {
  std::string video_id;
  std::filesystem::path embeddings;
  std::filesystem::path annotation;
};

struct DatasetManifest {
  std::string name;
  Reduction reduction = Reduction::kAverage;
  std::vector<VideoEntry> videos;
  // Empty when the manifest names no fold file.
  std::filesystem::path folds;
  std::filesystem::path base_dir;
};

struct VideoRecord {
  FrameEmbeddingSequence embeddings;
  Annotation annotation;
};

// Loaded dataset keyed by video id; immutable after load.
struct Dataset {
  DatasetManifest manifest;
  std::map<std::string, VideoRecord> videos;

  const VideoRecord& at(const std::string& id) const;
  std::vector<std::string> ids() const;
};

struct Fold {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

struct FoldSpec {
  std::vector<Fold> folds;
};

struct VideoStats {
  std::string video_id;
  std::size_t frames = 0;
  std::size_t dim = 0;
  std::size_t user_summaries = 0;
  std::size_t importance_annotations = 0;
  bool rank_metrics_available = false;
};

struct Violation {
  std::string video_id;
  std::string message;
};

struct ValidationReport {
  std::vector<VideoStats> videos;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string to_json() const;
};

// Embedding files: "KFE1", u64 T, u64 d (little-endian), then T*d float32 LE
// values, row-major.
void write_embeddings(const std::filesystem::path& path, const Matrix<float>& data);
Matrix<float> read_embeddings(const std::filesystem::path& path);

void write_annotation(const std::filesystem::path& path, const Annotation& annotation);
Annotation read_annotation(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

void write_folds(const std::filesystem::path& path, const FoldSpec& folds);

Dataset load_dataset(const std::filesystem::path& manifest_path);
ValidationReport validate_dataset(const Dataset& dataset);

// Parses a fold file and checks it against the dataset's ids.
FoldSpec load_folds(const std::filesystem::path& path, const Dataset& dataset);
void check_folds(const FoldSpec& folds, const std::vector<std::string>& dataset_ids);

}  // namespace vsum
