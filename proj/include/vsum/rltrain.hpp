#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vsum/model.hpp"
#include "vsum/optim.hpp"
#include "vsum/pretrain.hpp"
#include "vsum/rng.hpp"
#include "vsum/segmentation.hpp"

namespace vsum {

struct RLConfig {
  std::size_t epochs = 300;
  std::size_t batch_size = 16;
  std::size_t episodes = 5;
  double lr = 1e-5;
  double delta = 0.5;  // target mean score
  double beta = 0.001;  // regularizer weight
  double baseline_decay = 0.9;
  double baseline_init = 0.5;
  LossVariant loss_variant = LossVariant::kL1Cosine;
  bool include_dilated = true;
  bool shift_windows = true;
  AdamWOptions optimizer;
  std::uint64_t seed = 0;

  void validate() const;
};

// Probabilities are clamped to this range before taking logs.
inline constexpr double kLogProbClamp = 1e-6;

// a_t ~ Bernoulli(p_t) at valid positions, 0 at PAD.
template <typename T>
std::vector<std::uint8_t> sample_actions(std::span<const T> scores, std::span<const std::uint8_t> valid, Rng& rng);

// Row t is the original frame where actions[t] == 1 and the mask token
// elsewhere. PAD rows stay zero.
template <typename T>
Matrix<T> build_summary_input(const Matrix<T>& frames, std::span<const std::uint8_t> actions,
                              std::span<const std::uint8_t> valid, std::span<const T> token);

// R = sigmoid(-L_rec).
double compute_reward(double rec_loss);

// |mean of valid p_t - delta|. Throws kInvalidArgument with no valid frame.
template <typename T>
double regularization_loss(std::span<const T> scores, std::span<const std::uint8_t> valid, double delta);

// Sum over valid t of log pi(a_t | p_t) with p clamped.
template <typename T>
double log_probability(std::span<const T> scores, std::span<const std::uint8_t> actions,
                       std::span<const std::uint8_t> valid);

struct EpisodeTrace {
  std::vector<std::uint8_t> actions;
  double reward = 0.0;
  double log_prob = 0.0;
  double baseline = 0.0;
};

// Score-function part of d(loss)/d(logit_t) for one sub-sequence:
//   -(1/N) sum_n (R_n - b) (a_t - p_t)
// Zero at PAD positions.
template <typename T>
std::vector<double> policy_logit_gradient(std::span<const T> scores, std::span<const std::uint8_t> valid,
                                          std::span<const EpisodeTrace> episodes);

// d(L_reg)/d(logit_t); the subgradient at mean == delta is 0.
template <typename T>
std::vector<double> regularization_logit_gradient(std::span<const T> scores, std::span<const std::uint8_t> valid,
                                                  double delta);

struct BaselineState {
  double value = 0.5;
  double decay = 0.9;
  void update(double mean_reward) { value = decay * value + (1.0 - decay) * mean_reward; }
};

// Runs `episodes` sample/mask/reconstruct/reward cycles for one sub-sequence
// against the frozen generator.
template <typename T>
std::vector<EpisodeTrace> run_episodes(const GeneratorModel<T>& generator, const SubSequence<T>& sub,
                                       std::span<const T> scores, std::size_t episodes, double baseline,
                                       LossVariant variant, Rng& rng);

struct PolicyStepStats {
  double mean_reward = 0.0;
  double mean_reg = 0.0;
};

// One REINFORCE step over a batch: episodes, gradient, optimizer update,
// then the baseline update with the batch mean reward.
template <typename T>
PolicyStepStats policy_update(SummarizerModel<T>& summarizer, const GeneratorModel<T>& generator,
                              std::span<const SubSequence<T>* const> batch, const RLConfig& config,
                              BaselineState& baseline, AdamW<T>& optimizer, std::uint64_t seed);

// Mean reconstruction loss when each sub-sequence keeps its top
// ceil(delta * valid) frames by score and masks the rest.
template <typename T>
double selection_loss(const SummarizerModel<T>& summarizer, const GeneratorModel<T>& generator,
                      std::span<const SubSequence<T>> subs, double delta, LossVariant variant);

struct RLEpochLog {
  std::size_t epoch = 0;  // 1-based
  double mean_reward = 0.0;
  double baseline = 0.0;
  double mean_reg = 0.0;
  double selection_loss = 0.0;
};

template <typename T>
struct RLResult {
  SummarizerModel<T> final_model;
  SummarizerModel<T> best_model;
  double best_selection_loss = 0.0;
  std::size_t best_epoch = 0;
  BaselineState baseline;
  AdamWState<T> optimizer;
  std::vector<RLEpochLog> history;
};

// Throws kEmptyTrainSet, kFrozenModelViolation, or kDivergenceDetected.
template <typename T>
RLResult<T> train_summarizer(const std::vector<LabeledVideo<T>>& videos, const GeneratorModel<T>& generator,
                             SummarizerModel<T> summarizer, const RLConfig& config,
                             const std::function<void(const RLEpochLog&)>& on_epoch = {});

std::string rl_log_header();
std::string rl_log_row(const RLEpochLog& log);

}  // namespace vsum
