#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vsum/dataio.hpp"

namespace vsum {

struct FScore {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;  // 0..100
};

// Keyshot F-score between a machine summary and one user summary. Throws
// kLengthMismatch on unequal lengths and kInvalidArgument on non-binary entries.
FScore f_score(std::span<const std::uint8_t> machine, std::span<const int> user);

// Mean or max of per-user F values. Throws kEmptyAnnotationSet when empty.
double reduce_user_scores(std::span<const double> values, Reduction reduction);

// Tie-corrected Kendall tau-b in O(n log n). nullopt when either side is
// constant or n < 2. Throws kLengthMismatch on unequal lengths.
std::optional<double> kendall_tau(std::span<const double> x, std::span<const double> y);

// Pearson correlation of average ranks. nullopt when either side is constant.
std::optional<double> spearman_rho(std::span<const double> x, std::span<const double> y);

// Tie-averaged ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

// Probability that a random positive outranks a random negative (ties count
// half). nullopt when either class is empty.
std::optional<double> roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct VideoEval {
  std::string video_id;
  std::size_t fold = 0;
  FScore score;
  std::optional<double> tau;
  std::optional<double> rho;
};

// Per-user F reduced per `reduction` (precision and recall follow: averaged,
// or taken from the best user). tau/rho are averaged over users with frame
// importances; nullopt when no user yields a defined value.
VideoEval evaluate_video(const std::string& video_id, std::span<const std::uint8_t> summary,
                         std::span<const double> frame_scores, const Annotation& annotation, Reduction reduction);

struct FoldEval {
  std::size_t fold = 0;
  std::size_t videos = 0;
  double f = 0.0;
  std::optional<double> tau;
  std::optional<double> rho;
};

struct EvalReport {
  std::string dataset;
  Reduction reduction = Reduction::kAverage;
  std::vector<VideoEval> videos;
  std::vector<FoldEval> folds;
  double f = 0.0;  // mean of fold means
  std::optional<double> tau;
  std::optional<double> rho;

  std::string to_csv() const;
  std::string to_json() const;
};

struct VideoOutput {
  std::vector<double> scores;         // o_t
  std::vector<std::uint8_t> summary;  // A_t
};

// Evaluates each fold's test videos and averages over folds. Throws
// kMissingOutput when a test video has no output.
EvalReport evaluate_dataset(const std::map<std::string, VideoOutput>& outputs, const Dataset& dataset,
                            const FoldSpec& folds, Reduction reduction);

}  // namespace vsum
