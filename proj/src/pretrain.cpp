#include "vsum/pretrain.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "vsum/error.hpp"
#include "vsum/rng.hpp"

namespace vsum {

LossVariant parse_loss_variant(const std::string& name) {
  if (name == "l1+ce") return LossVariant::kL1Cosine;
  if (name == "ce") return LossVariant::kCosine;
  if (name == "l1") return LossVariant::kL1;
  if (name == "mse") return LossVariant::kMse;
  if (name == "mse+ce") return LossVariant::kMseCosine;
  throw Error(ErrorCode::kInvalidArgument, "unknown loss variant '" + name + "'");
}

std::string loss_variant_name(LossVariant v) {
  switch (v) {
    case LossVariant::kL1Cosine: return "l1+ce";
    case LossVariant::kCosine: return "ce";
    case LossVariant::kL1: return "l1";
    case LossVariant::kMse: return "mse";
    case LossVariant::kMseCosine: return "mse+ce";
  }
  return "l1+ce";
}

template <typename T>
LossTerms reconstruction_loss(const Matrix<T>& target, const Matrix<T>& recon, std::span<const std::uint8_t> include,
                              LossVariant variant, Matrix<T>* grad) {
  if (target.rows() != recon.rows() || target.cols() != recon.cols() || include.size() != target.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "reconstruction and target shapes differ");
  }
  std::size_t count = 0;
  for (auto f : include) count += f ? 1 : 0;
  if (count == 0) throw Error(ErrorCode::kInvalidArgument, "reconstruction loss needs at least one frame");

  const bool use_cos = variant == LossVariant::kL1Cosine || variant == LossVariant::kCosine ||
                       variant == LossVariant::kMseCosine;
  const bool use_l1 = variant == LossVariant::kL1Cosine || variant == LossVariant::kL1;
  const bool use_mse = variant == LossVariant::kMse || variant == LossVariant::kMseCosine;

  const std::size_t d = target.cols();
  const double inv_count = 1.0 / static_cast<double>(count);
  if (grad) *grad = Matrix<T>(target.rows(), d, T(0));

  LossTerms terms;
  for (std::size_t t = 0; t < target.rows(); ++t) {
    if (!include[t]) continue;
    const auto e = target.row(t);
    const auto r = recon.row(t);
    double dot = 0, ne = 0, nr = 0, l1 = 0, sq = 0;
    for (std::size_t c = 0; c < d; ++c) {
      const double ev = e[c], rv = r[c];
      dot += ev * rv;
      ne += ev * ev;
      nr += rv * rv;
      l1 += std::abs(ev - rv);
      sq += (ev - rv) * (ev - rv);
    }
    ne = std::sqrt(ne);
    nr = std::sqrt(nr);
    const bool degenerate = ne < 1e-12 || nr < 1e-12;
    const double cos = degenerate ? 0.0 : dot / (ne * nr);
    terms.cosine += 1.0 - cos;
    terms.l1 += l1 * inv_count;
    terms.mse += sq / static_cast<double>(d) * inv_count;

    if (!grad) continue;
    auto g = grad->row(t);
    for (std::size_t c = 0; c < d; ++c) {
      const double ev = e[c], rv = r[c];
      double gv = 0;
      if (use_cos && !degenerate) gv -= ev / (ne * nr) - cos * rv / (nr * nr);
      if (use_l1) {
        const double diff = rv - ev;
        gv += (diff > 0 ? 1.0 : diff < 0 ? -1.0 : 0.0) * inv_count;
      }
      if (use_mse) gv += 2.0 * (rv - ev) / static_cast<double>(d) * inv_count;
      g[c] = static_cast<T>(gv);
    }
  }
  terms.total = (use_cos ? terms.cosine : 0.0) + (use_l1 ? terms.l1 : 0.0) + (use_mse ? terms.mse : 0.0);
  return terms;
}

void PretrainConfig::validate() const {
  if (batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch_size must be positive");
  if (warmup_epochs < 0 || warmup_epochs > cosine_horizon_epochs) {
    throw Error(ErrorCode::kInvalidArgument, "need 0 <= warmup_epochs <= cosine_horizon_epochs");
  }
  if (!(masking.window_ratio > 0 && masking.window_ratio <= 1) ||
      !(masking.mask_ratio > 0 && masking.mask_ratio <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "masking ratios must lie in (0, 1]");
  }
  if (peak_lr < 0) throw Error(ErrorCode::kInvalidArgument, "peak_lr must be non-negative");
}

double lr_at(double epoch, const PretrainConfig& c) {
  if (epoch < c.warmup_epochs) return c.peak_lr * epoch / c.warmup_epochs;
  if (epoch >= c.cosine_horizon_epochs) return 0.0;
  const double span = c.cosine_horizon_epochs - c.warmup_epochs;
  const double progress = (epoch - c.warmup_epochs) / span;
  return c.peak_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

template <typename T>
PretrainResult<T> pretrain(const std::vector<LabeledVideo<T>>& videos, GeneratorModel<T> model,
                           const PretrainConfig& config,
                           const std::function<void(const PretrainEpochLog&)>& on_epoch) {
  config.validate();
  if (videos.empty()) throw Error(ErrorCode::kEmptyTrainSet, "pretraining needs at least one video");
  const std::size_t len = model.config().max_len;
  const auto half = static_cast<std::int64_t>(len / 2);

  PretrainResult<T> result;
  result.best_model = model;
  result.best_loss = std::numeric_limits<double>::infinity();
  AdamW<T> optimizer(config.optimizer);
  const std::vector<T> token(model.mask_token().begin(), model.mask_token().end());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<SubSequence<T>> subs;
    for (std::size_t v = 0; v < videos.size(); ++v) {
      std::int64_t shift = 0;
      if (config.shift_windows) shift = Rng(derive_seed(config.seed, "delta", epoch, v)).uniform_int(-half, half);
      auto parts = decompose(videos[v].embeddings, videos[v].video_id, videos[v].shots, len, shift,
                             config.include_dilated);
      for (auto& p : parts) subs.push_back(std::move(p));
    }
    std::vector<std::size_t> order(subs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng(derive_seed(config.seed, "shuffle", epoch)).shuffle(order.begin(), order.end());

    const std::size_t batches = (subs.size() + config.batch_size - 1) / config.batch_size;
    PretrainEpochLog log;
    log.epoch = epoch + 1;
    std::size_t counted = 0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * config.batch_size;
      const std::size_t end = std::min(subs.size(), begin + config.batch_size);
      model.params().zero_grad();
      const T inv_batch = T(1) / static_cast<T>(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        const auto& sub = subs[order[k]];
        if (sub.valid_count() == 0) continue;
        const MaskPlan plan = plan_masking(sub, config.masking, derive_seed(config.seed, "masking", epoch, k));
        const Matrix<T> masked = apply_mask(sub, plan, std::span<const T>(token));
        GeneratorTape<T> tape;
        const Matrix<T> recon = model.forward(masked, sub.valid_mask, &tape);

        std::vector<std::uint8_t> include = sub.valid_mask;
        if (config.masked_only) {
          for (std::size_t p = 0; p < include.size(); ++p) {
            include[p] = include[p] && plan.dispositions[p].kind != Disposition::kKeep;
          }
          if (std::find(include.begin(), include.end(), 1) == include.end()) continue;
        }
        Matrix<T> grad;
        const LossTerms terms = reconstruction_loss(sub.frames, recon, include, config.loss_variant, &grad);
        if (!std::isfinite(terms.total)) {
          throw Error(ErrorCode::kDivergenceDetected,
                      "non-finite reconstruction loss in epoch " + std::to_string(epoch + 1));
        }
        for (T& g : grad.values()) g *= inv_batch;
        model.backward(tape, grad);
        log.cosine += terms.cosine;
        log.l1 += terms.l1;
        log.rec += terms.total;
        ++counted;
      }
      log.lr = lr_at(static_cast<double>(epoch) + static_cast<double>(b) / static_cast<double>(batches), config);
      optimizer.step(model.params(), log.lr);
    }
    if (counted > 0) {
      log.cosine /= static_cast<double>(counted);
      log.l1 /= static_cast<double>(counted);
      log.rec /= static_cast<double>(counted);
    }
    result.history.push_back(log);
    if (log.rec < result.best_loss) {
      result.best_loss = log.rec;
      result.best_epoch = log.epoch;
      result.best_model = model;
    }
    if (on_epoch) on_epoch(log);
  }
  result.optimizer = optimizer.state();
  result.final_model = std::move(model);
  if (result.best_epoch == 0) result.best_model = result.final_model;
  return result;
}

std::string pretrain_log_header() { return "epoch,mean_l_ce,mean_l_l1,mean_l_rec,lr"; }

std::string pretrain_log_row(const PretrainEpochLog& log) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g,%.9g", log.epoch, log.cosine, log.l1, log.rec, log.lr);
  return buf;
}

#define VSUM_INSTANTIATE(T)                                                                               \
  template LossTerms reconstruction_loss<T>(const Matrix<T>&, const Matrix<T>&, std::span<const std::uint8_t>, \
                                            LossVariant, Matrix<T>*);                                      \
  template PretrainResult<T> pretrain<T>(const std::vector<LabeledVideo<T>>&, GeneratorModel<T>,          \
                                         const PretrainConfig&,                                            \
                                         const std::function<void(const PretrainEpochLog&)>&);

VSUM_INSTANTIATE(float)
VSUM_INSTANTIATE(double)
#undef VSUM_INSTANTIATE

}  // namespace vsum
