#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vsum/model.hpp"
#include "vsum/segmentation.hpp"

namespace vsum {

struct FrameScores {
  std::string video_id;
  std::vector<double> scores;               // o_t
  std::vector<std::uint32_t> contributions;  // sub-sequences that scored frame t
};

// o_t is the mean of every score a sub-sequence assigned to frame t (PAD
// excluded). Throws kIndexOutOfRange for a source index >= frames and
// kInvalidArgument when some frame received no score.
FrameScores aggregate_scores(const std::string& video_id, std::size_t frames,
                             std::span<const std::vector<std::int64_t>> source_indices,
                             std::span<const std::vector<double>> sub_scores);

// Scores sequential (shift 0) and, unless sequential_only, dilated windows
// and aggregates them.
template <typename T>
FrameScores score_video(const SummarizerModel<T>& summarizer, const Matrix<T>& embeddings,
                        const std::string& video_id, bool sequential_only = false);

// Mean frame score per shot.
std::vector<double> shot_scores(std::span<const double> scores, const ShotTable& shots);

// floor(ratio * frames), never above the ratio.
std::size_t summary_budget(std::size_t frames, double ratio = 0.15);

// Exact 0/1 knapsack over integer lengths. Among optimal sets the
// lexicographically smallest ascending index list wins. Throws
// kInvalidArgument on a zero length or mismatched inputs.
std::vector<std::size_t> knapsack_select(std::span<const double> values, std::span<const std::size_t> lengths,
                                         std::size_t capacity);

struct SummarySelection {
  std::string video_id;
  std::vector<std::size_t> selected_shots;
  std::vector<std::uint8_t> summary;  // A_t
  std::size_t budget = 0;
};

// Expands selected shots into the binary frame summary. Throws
// kIndexOutOfRange for an unknown shot.
SummarySelection emit_summary(const std::string& video_id, std::span<const std::size_t> selected,
                              const ShotTable& shots, std::size_t budget);

// Shot scoring, knapsack, and expansion in one step.
SummarySelection summarize_scores(const FrameScores& scores, const ShotTable& shots, double ratio = 0.15);

struct ScoreRow {
  std::size_t frame = 0;
  double score = 0.0;
  std::int64_t shot = -1;
  bool selected = false;
};

// CSV header: frame_index,score,shot_index,selected. Scores are written with
// 17 significant digits so they read back exactly.
void write_scores_csv(const std::filesystem::path& path, const FrameScores& scores, const ShotTable* shots,
                      const SummarySelection* selection);
// Throws kMissingScores when absent and kParseError on malformed rows.
std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path);

// JSON: {"video_id", "budget", "selected_shots", "A": "0011..."}.
void write_summary_json(const std::filesystem::path& path, const SummarySelection& selection);
SummarySelection read_summary_json(const std::filesystem::path& path);

}  // namespace vsum
