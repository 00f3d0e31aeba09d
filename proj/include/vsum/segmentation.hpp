#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vsum/matrix.hpp"

namespace vsum {

struct ShotTable {
  std::vector<std::size_t> boundaries;  // shot start indices, boundaries[0] == 0
  std::vector<std::int32_t> labels;     // per-frame shot index
  std::vector<std::size_t> lengths;     // per-shot frame counts

  std::size_t frames() const { return labels.size(); }
  std::size_t shot_count() const { return boundaries.size(); }
  std::size_t shot_end(std::size_t shot) const { return boundaries[shot] + lengths[shot]; }

  // Throws kDimensionMismatch on malformed boundaries.
  static ShotTable from_boundaries(std::vector<std::size_t> boundaries, std::size_t frames);
  std::string to_json(const std::string& video_id) const;
};

// A video paired with its shot table; the unit the trainers consume.
template <typename T>
struct LabeledVideo {
  std::string video_id;
  Matrix<T> embeddings;
  ShotTable shots;
};

inline constexpr std::int64_t kPadIndex = -1;
inline constexpr std::int32_t kPadLabel = -1;

// Fixed-length window of a video. Rows at PAD positions are all zero.
template <typename T>
struct SubSequence {
  std::string source_video_id;
  Matrix<T> frames;                          // L x d
  std::vector<std::int64_t> source_indices;  // kPadIndex at PAD positions
  std::vector<std::int32_t> shot_labels;     // kPadLabel at PAD or when unlabelled
  std::vector<std::uint8_t> valid_mask;      // 1 where source_indices is a real frame

  std::size_t length() const { return source_indices.size(); }
  std::size_t valid_count() const;
};

struct KtsOptions {
  // Negative selects the default floor(T / 20).
  std::int64_t max_change_points = -1;
  double penalty_weight = 1.0;
  // Cosine (L2-normalized) linear kernel when true, raw dot products otherwise.
  bool normalize = true;
};

struct KtsResult {
  ShotTable shots;
  double objective = 0.0;  // within-segment scatter of the chosen segmentation
  double penalized = 0.0;  // objective + penalty term
};

// Penalized kernel change-point detection. Exact DP over all segmentations
// with up to max_change_points interior change points.
template <typename T>
KtsResult kts_segment(const Matrix<T>& embeddings, const KtsOptions& options = {});

// Penalty added for m change points over T frames.
double kts_penalty(std::size_t change_points, std::size_t frames, double penalty_weight);

// Consecutive L-frame windows; the window grid is shifted by `shift` frames
// and every real frame lands in exactly one window.
template <typename T>
std::vector<SubSequence<T>> sequential_split(const Matrix<T>& embeddings, const std::string& video_id,
                                             std::size_t length, std::int64_t shift = 0);

// With n = ceil(T / L), sub-sequence i holds frames i, i + n, i + 2n, ...
template <typename T>
std::vector<SubSequence<T>> dilated_split(const Matrix<T>& embeddings, const std::string& video_id,
                                          std::size_t length);

// Fills shot_labels from the shot table. Throws kIndexOutOfRange when a source
// index is not a frame of the table.
template <typename T>
void attach_shot_labels(SubSequence<T>& sub, const ShotTable& shots);

// Sequential (at `shift`) plus dilated windows with shot labels attached.
template <typename T>
std::vector<SubSequence<T>> decompose(const Matrix<T>& embeddings, const std::string& video_id,
                                      const ShotTable& shots, std::size_t length, std::int64_t shift,
                                      bool include_dilated = true);

}  // namespace vsum
