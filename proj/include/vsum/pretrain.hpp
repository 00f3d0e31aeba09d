#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vsum/masking.hpp"
#include "vsum/model.hpp"
#include "vsum/optim.hpp"
#include "vsum/segmentation.hpp"

namespace vsum {

enum class LossVariant { kL1Cosine, kCosine, kL1, kMse, kMseCosine };

LossVariant parse_loss_variant(const std::string& name);
std::string loss_variant_name(LossVariant v);

struct LossTerms {
  double cosine = 0.0;  // sum over frames of (1 - cos)
  double l1 = 0.0;      // mean over frames of ||e - e_hat||_1
  double mse = 0.0;     // mean over frames of the per-frame mean squared error
  double total = 0.0;   // sum of the variant's active terms
};

// Reconstruction loss over the frames flagged in `include`. When `grad` is
// non-null it receives d(total)/d(reconstruction). A frame whose target or
// reconstruction has norm below 1e-12 contributes 1 to the cosine term and
// no cosine gradient. Throws kInvalidArgument if no frame is included.
template <typename T>
LossTerms reconstruction_loss(const Matrix<T>& target, const Matrix<T>& reconstruction,
                              std::span<const std::uint8_t> include, LossVariant variant,
                              Matrix<T>* grad = nullptr);

struct PretrainConfig {
  std::size_t epochs = 250;
  std::size_t batch_size = 128;
  double peak_lr = 0.01;
  double warmup_epochs = 100;
  double cosine_horizon_epochs = 1000;
  MaskingOptions masking;
  LossVariant loss_variant = LossVariant::kL1Cosine;
  // Restrict the loss to candidate-window frames instead of all valid frames.
  bool masked_only = false;
  bool include_dilated = true;
  bool shift_windows = true;
  AdamWOptions optimizer;
  std::uint64_t seed = 0;

  void validate() const;
};

// Linear warmup from 0 to peak_lr over warmup_epochs, then half-cosine decay
// reaching 0 at cosine_horizon_epochs. `epoch` may be fractional.
double lr_at(double epoch, const PretrainConfig& config);

struct PretrainEpochLog {
  std::size_t epoch = 0;  // 1-based
  double cosine = 0.0;
  double l1 = 0.0;
  double rec = 0.0;
  double lr = 0.0;  // rate at the epoch's last step
};

template <typename T>
struct PretrainResult {
  GeneratorModel<T> final_model;
  GeneratorModel<T> best_model;
  double best_loss = 0.0;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  AdamWState<T> optimizer;
  std::vector<PretrainEpochLog> history;
};

// Self-supervised masked reconstruction training. Throws kEmptyTrainSet on
// no videos and kDivergenceDetected on a non-finite loss.
template <typename T>
PretrainResult<T> pretrain(const std::vector<LabeledVideo<T>>& videos, GeneratorModel<T> model,
                           const PretrainConfig& config,
                           const std::function<void(const PretrainEpochLog&)>& on_epoch = {});

std::string pretrain_log_header();
std::string pretrain_log_row(const PretrainEpochLog& log);

}  // namespace vsum
