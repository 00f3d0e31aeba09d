#include "vsum/rltrain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "vsum/error.hpp"

namespace vsum {

void RLConfig::validate() const {
  if (!(delta > 0 && delta < 1)) throw Error(ErrorCode::kInvalidArgument, "delta must lie in (0, 1)");
  if (beta < 0) throw Error(ErrorCode::kInvalidArgument, "beta must be non-negative");
  if (episodes == 0) throw Error(ErrorCode::kInvalidArgument, "episodes must be at least 1");
  if (batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch_size must be positive");
  if (!(baseline_decay >= 0 && baseline_decay < 1)) {
    throw Error(ErrorCode::kInvalidArgument, "baseline decay must lie in [0, 1)");
  }
  if (lr < 0) throw Error(ErrorCode::kInvalidArgument, "lr must be non-negative");
}

template <typename T>
std::vector<std::uint8_t> sample_actions(std::span<const T> scores, std::span<const std::uint8_t> valid, Rng& rng) {
  if (scores.size() != valid.size()) throw Error(ErrorCode::kShapeMismatch, "scores and mask lengths differ");
  std::vector<std::uint8_t> actions(scores.size(), 0);
  for (std::size_t t = 0; t < scores.size(); ++t) {
    if (valid[t]) actions[t] = rng.bernoulli(static_cast<double>(scores[t])) ? 1 : 0;
  }
  return actions;
}

template <typename T>
Matrix<T> build_summary_input(const Matrix<T>& frames, std::span<const std::uint8_t> actions,
                              std::span<const std::uint8_t> valid, std::span<const T> token) {
  if (actions.size() != frames.rows() || valid.size() != frames.rows() || token.size() != frames.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "summary input shapes disagree");
  }
  Matrix<T> out = frames;
  for (std::size_t t = 0; t < frames.rows(); ++t) {
    if (valid[t] && !actions[t]) std::copy(token.begin(), token.end(), out.row(t).begin());
  }
  return out;
}

double compute_reward(double rec_loss) { return 1.0 / (1.0 + std::exp(rec_loss)); }

namespace {

template <typename T>
std::pair<double, std::size_t> valid_mean(std::span<const T> scores, std::span<const std::uint8_t> valid) {
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < scores.size(); ++t) {
    if (!valid[t]) continue;
    sum += static_cast<double>(scores[t]);
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "no valid frame in sub-sequence");
  return {sum / static_cast<double>(n), n};
}

}  // namespace

template <typename T>
double regularization_loss(std::span<const T> scores, std::span<const std::uint8_t> valid, double delta) {
  return std::abs(valid_mean(scores, valid).first - delta);
}

template <typename T>
double log_probability(std::span<const T> scores, std::span<const std::uint8_t> actions,
                       std::span<const std::uint8_t> valid) {
  double sum = 0;
  for (std::size_t t = 0; t < scores.size(); ++t) {
    if (!valid[t]) continue;
    const double p = std::clamp(static_cast<double>(scores[t]), kLogProbClamp, 1.0 - kLogProbClamp);
    sum += actions[t] ? std::log(p) : std::log1p(-p);
  }
  return sum;
}

template <typename T>
std::vector<double> policy_logit_gradient(std::span<const T> scores, std::span<const std::uint8_t> valid,
                                          std::span<const EpisodeTrace> episodes) {
  std::vector<double> g(scores.size(), 0.0);
  if (episodes.empty()) return g;
  const double inv_n = 1.0 / static_cast<double>(episodes.size());
  for (const auto& ep : episodes) {
    const double adv = ep.reward - ep.baseline;
    if (adv == 0.0) continue;
    for (std::size_t t = 0; t < scores.size(); ++t) {
      if (valid[t]) g[t] -= inv_n * adv * (static_cast<double>(ep.actions[t]) - static_cast<double>(scores[t]));
    }
  }
  return g;
}

template <typename T>
std::vector<double> regularization_logit_gradient(std::span<const T> scores, std::span<const std::uint8_t> valid,
                                                  double delta) {
  const auto [mean, n] = valid_mean(scores, valid);
  std::vector<double> g(scores.size(), 0.0);
  const double sign = mean > delta ? 1.0 : mean < delta ? -1.0 : 0.0;
  if (sign == 0.0) return g;
  for (std::size_t t = 0; t < scores.size(); ++t) {
    if (!valid[t]) continue;
    const double p = static_cast<double>(scores[t]);
    g[t] = sign * p * (1.0 - p) / static_cast<double>(n);
  }
  return g;
}

template <typename T>
std::vector<EpisodeTrace> run_episodes(const GeneratorModel<T>& generator, const SubSequence<T>& sub,
                                       std::span<const T> scores, std::size_t episodes, double baseline,
                                       LossVariant variant, Rng& rng) {
  std::vector<EpisodeTrace> out;
  out.reserve(episodes);
  for (std::size_t n = 0; n < episodes; ++n) {
    EpisodeTrace ep;
    ep.actions = sample_actions(scores, std::span<const std::uint8_t>(sub.valid_mask), rng);
    const Matrix<T> input = build_summary_input(sub.frames, ep.actions, sub.valid_mask, generator.mask_token());
    const Matrix<T> recon = generator.forward(input, sub.valid_mask);
    const LossTerms loss = reconstruction_loss(sub.frames, recon, sub.valid_mask, variant);
    if (!std::isfinite(loss.total)) throw Error(ErrorCode::kDivergenceDetected, "non-finite episode loss");
    ep.reward = compute_reward(loss.total);
    ep.log_prob = log_probability(scores, std::span<const std::uint8_t>(ep.actions), sub.valid_mask);
    ep.baseline = baseline;
    out.push_back(std::move(ep));
  }
  return out;
}

template <typename T>
PolicyStepStats policy_update(SummarizerModel<T>& summarizer, const GeneratorModel<T>& generator,
                              std::span<const SubSequence<T>* const> batch, const RLConfig& config,
                              BaselineState& baseline, AdamW<T>& optimizer, std::uint64_t seed) {
  PolicyStepStats stats;
  summarizer.params().zero_grad();
  std::size_t used = 0;
  double reward_sum = 0;
  std::size_t reward_count = 0;
  for (std::size_t k = 0; k < batch.size(); ++k) if (batch[k]->valid_count() > 0) ++used;
  if (used == 0) return stats;
  const double inv_batch = 1.0 / static_cast<double>(used);

  for (std::size_t k = 0; k < batch.size(); ++k) {
    const SubSequence<T>& sub = *batch[k];
    if (sub.valid_count() == 0) continue;
    SummarizerTape<T> tape;
    const std::vector<T> scores = summarizer.forward(sub.frames, sub.valid_mask, &tape);
    const std::span<const T> p(scores);
    Rng rng(derive_seed(seed, "episodes", k));
    const auto episodes = run_episodes(generator, sub, p, config.episodes, baseline.value, config.loss_variant, rng);
    for (const auto& ep : episodes) reward_sum += ep.reward;
    reward_count += episodes.size();

    const auto pg = policy_logit_gradient(p, std::span<const std::uint8_t>(sub.valid_mask),
                                          std::span<const EpisodeTrace>(episodes));
    const auto rg = regularization_logit_gradient(p, std::span<const std::uint8_t>(sub.valid_mask), config.delta);
    stats.mean_reg += regularization_loss(p, std::span<const std::uint8_t>(sub.valid_mask), config.delta) * inv_batch;

    std::vector<T> d_logits(scores.size(), T(0));
    for (std::size_t t = 0; t < scores.size(); ++t) {
      const double g = (pg[t] + config.beta * rg[t]) * inv_batch;
      if (!std::isfinite(g)) throw Error(ErrorCode::kDivergenceDetected, "non-finite policy gradient");
      d_logits[t] = static_cast<T>(g);
    }
    summarizer.backward(tape, d_logits);
  }
  optimizer.step(summarizer.params(), config.lr);
  stats.mean_reward = reward_sum / static_cast<double>(reward_count);
  baseline.update(stats.mean_reward);
  return stats;
}

template <typename T>
double selection_loss(const SummarizerModel<T>& summarizer, const GeneratorModel<T>& generator,
                      std::span<const SubSequence<T>> subs, double delta, LossVariant variant) {
  double total = 0;
  std::size_t count = 0;
  for (const auto& sub : subs) {
    const std::size_t valid = sub.valid_count();
    if (valid == 0) continue;
    const std::vector<T> scores = summarizer.forward(sub.frames, sub.valid_mask);
    std::vector<std::size_t> order;
    for (std::size_t t = 0; t < scores.size(); ++t) if (sub.valid_mask[t]) order.push_back(t);
    // Stable order so equal scores keep the earlier frame.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(delta * static_cast<double>(valid) - 1e-9)));
    std::vector<std::uint8_t> actions(scores.size(), 0);
    for (std::size_t i = 0; i < keep && i < order.size(); ++i) actions[order[i]] = 1;
    const Matrix<T> input = build_summary_input(sub.frames, actions, sub.valid_mask, generator.mask_token());
    const Matrix<T> recon = generator.forward(input, sub.valid_mask);
    total += reconstruction_loss(sub.frames, recon, sub.valid_mask, variant).total;
    ++count;
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

template <typename T>
RLResult<T> train_summarizer(const std::vector<LabeledVideo<T>>& videos, const GeneratorModel<T>& generator,
                             SummarizerModel<T> summarizer, const RLConfig& config,
                             const std::function<void(const RLEpochLog&)>& on_epoch) {
  config.validate();
  if (videos.empty()) throw Error(ErrorCode::kEmptyTrainSet, "RL training needs at least one video");
  if (summarizer.config() != generator.config()) {
    throw Error(ErrorCode::kConfigMismatch, "summarizer and generator configs differ");
  }
  const std::size_t len = generator.config().max_len;
  const auto half = static_cast<std::int64_t>(len / 2);
  const std::uint64_t frozen_hash = generator.params().hash();

  std::vector<SubSequence<T>> eval_subs;
  for (const auto& v : videos) {
    for (auto& s : decompose(v.embeddings, v.video_id, v.shots, len, 0, config.include_dilated)) {
      eval_subs.push_back(std::move(s));
    }
  }

  RLResult<T> result;
  result.baseline = BaselineState{config.baseline_init, config.baseline_decay};
  result.best_selection_loss = std::numeric_limits<double>::infinity();
  result.best_model = summarizer;
  AdamW<T> optimizer(config.optimizer);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<SubSequence<T>> subs;
    for (std::size_t v = 0; v < videos.size(); ++v) {
      std::int64_t shift = 0;
      if (config.shift_windows) shift = Rng(derive_seed(config.seed, "rl.delta", epoch, v)).uniform_int(-half, half);
      for (auto& s : decompose(videos[v].embeddings, videos[v].video_id, videos[v].shots, len, shift,
                               config.include_dilated)) {
        subs.push_back(std::move(s));
      }
    }
    std::vector<const SubSequence<T>*> order;
    for (const auto& s : subs) order.push_back(&s);
    Rng(derive_seed(config.seed, "rl.shuffle", epoch)).shuffle(order.begin(), order.end());

    RLEpochLog log;
    log.epoch = epoch + 1;
    std::size_t steps = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const std::span<const SubSequence<T>* const> batch(order.data() + begin, end - begin);
      const auto stats = policy_update(summarizer, generator, batch, config, result.baseline, optimizer,
                                       derive_seed(config.seed, "actions", epoch, steps));
      log.mean_reward += stats.mean_reward;
      log.mean_reg += stats.mean_reg;
      ++steps;
    }
    if (generator.params().hash() != frozen_hash) {
      throw Error(ErrorCode::kFrozenModelViolation, "generator parameters changed during RL training");
    }
    if (steps) {
      log.mean_reward /= static_cast<double>(steps);
      log.mean_reg /= static_cast<double>(steps);
    }
    log.baseline = result.baseline.value;
    log.selection_loss = selection_loss(summarizer, generator, std::span<const SubSequence<T>>(eval_subs),
                                        config.delta, config.loss_variant);
    if (!std::isfinite(log.selection_loss)) {
      throw Error(ErrorCode::kDivergenceDetected, "non-finite selection loss in epoch " + std::to_string(epoch + 1));
    }
    result.history.push_back(log);
    if (log.selection_loss < result.best_selection_loss) {
      result.best_selection_loss = log.selection_loss;
      result.best_epoch = log.epoch;
      result.best_model = summarizer;
    }
    if (on_epoch) on_epoch(log);
  }
  result.optimizer = optimizer.state();
  result.final_model = std::move(summarizer);
  if (result.best_epoch == 0) result.best_model = result.final_model;
  return result;
}

std::string rl_log_header() { return "epoch,mean_reward,baseline,mean_l_reg,selection_l_rec"; }

std::string rl_log_row(const RLEpochLog& log) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g,%.9g", log.epoch, log.mean_reward, log.baseline, log.mean_reg,
                log.selection_loss);
  return buf;
}

#define VSUM_INSTANTIATE(T)                                                                                     \
  template std::vector<std::uint8_t> sample_actions<T>(std::span<const T>, std::span<const std::uint8_t>, Rng&); \
  template Matrix<T> build_summary_input<T>(const Matrix<T>&, std::span<const std::uint8_t>,                    \
                                            std::span<const std::uint8_t>, std::span<const T>);                 \
  template double regularization_loss<T>(std::span<const T>, std::span<const std::uint8_t>, double);          \
  template double log_probability<T>(std::span<const T>, std::span<const std::uint8_t>,                        \
                                     std::span<const std::uint8_t>);                                            \
  template std::vector<double> policy_logit_gradient<T>(std::span<const T>, std::span<const std::uint8_t>,     \
                                                        std::span<const EpisodeTrace>);                         \
  template std::vector<double> regularization_logit_gradient<T>(std::span<const T>,                            \
                                                                std::span<const std::uint8_t>, double);         \
  template std::vector<EpisodeTrace> run_episodes<T>(const GeneratorModel<T>&, const SubSequence<T>&,          \
                                                     std::span<const T>, std::size_t, double, LossVariant,      \
                                                     Rng&);                                                     \
  template PolicyStepStats policy_update<T>(SummarizerModel<T>&, const GeneratorModel<T>&,                      \
                                            std::span<const SubSequence<T>* const>, const RLConfig&,            \
                                            BaselineState&, AdamW<T>&, std::uint64_t);                          \
  template double selection_loss<T>(const SummarizerModel<T>&, const GeneratorModel<T>&,                       \
                                     std::span<const SubSequence<T>>, double, LossVariant);                     \
  template RLResult<T> train_summarizer<T>(const std::vector<LabeledVideo<T>>&, const GeneratorModel<T>&,       \
                                           SummarizerModel<T>, const RLConfig&,                                 \
                                           const std::function<void(const RLEpochLog&)>&);

VSUM_INSTANTIATE(float)
VSUM_INSTANTIATE(double)
#undef VSUM_INSTANTIATE

}  // namespace vsum
