#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vsum/matrix.hpp"
#include "vsum/segmentation.hpp"

namespace vsum {

enum class Disposition : std::uint8_t { kKeep, kMask, kReplace };

struct FrameAction {
  Disposition kind = Disposition::kKeep;
  // In-sub position copied into this frame when kind == kReplace.
  std::int64_t source = -1;
};

struct MaskWindow {
  std::size_t start = 0;
  std::size_t length = 0;
  Disposition disposition = Disposition::kKeep;
  // Start of the copied window when disposition == kReplace.
  std::size_t source_start = 0;
};

struct MaskPlan {
  std::vector<FrameAction> dispositions;  // one per sub-sequence position
  std::vector<MaskWindow> candidate_windows;
  std::uint64_t rng_seed = 0;
  std::size_t valid_frames = 0;
};

enum class MaskingMethod {
  kDynamicWindow,  // window = ceil(window_ratio * in-sub shot length)
  kFixedWindow,    // window = min(fixed_window, in-sub shot length)
  kRandom,         // Bernoulli(mask_ratio) per valid frame, all masked
};

struct MaskingOptions {
  MaskingMethod method = MaskingMethod::kDynamicWindow;
  double window_ratio = 0.5;  // D_R
  double mask_ratio = 0.25;   // M_R
  std::size_t fixed_window = 8;
  double p_mask = 0.8;
  double p_replace = 0.1;
  int max_retries = 100;
};

MaskingMethod parse_masking_method(const std::string& name);
std::string masking_method_name(MaskingMethod method);

// Draws candidate windows inside single shots until their total length
// reaches mask_ratio * valid frames, then assigns each a disposition.
// Throws kInsufficientMaskableFrames when the budget cannot be met.
MaskPlan plan_masking(std::span<const std::int32_t> shot_labels, std::span<const std::uint8_t> valid_mask,
                      const MaskingOptions& options, std::uint64_t seed);

template <typename T>
MaskPlan plan_masking(const SubSequence<T>& sub, const MaskingOptions& options, std::uint64_t seed) {
  return plan_masking(sub.shot_labels, sub.valid_mask, options, seed);
}

// Returns the masked copy of sub.frames.
template <typename T>
Matrix<T> apply_mask(const SubSequence<T>& sub, const MaskPlan& plan, std::span<const T> token);

// Sum of candidate lengths over valid frame count (0 for an empty plan).
double mask_fraction(const MaskPlan& plan);

}  // namespace vsum
