#include "vsum/masking.hpp"

#include <algorithm>
#include <cmath>

#include "vsum/error.hpp"
#include "vsum/rng.hpp"

namespace vsum {

namespace {

struct Span {
  std::size_t begin;
  std::size_t end;  // exclusive
  std::size_t size() const { return end - begin; }
};

// Maximal runs of valid positions sharing one shot label.
std::vector<Span> shot_runs(std::span<const std::int32_t> labels, std::span<const std::uint8_t> valid) {
  std::vector<Span> runs;
  std::size_t p = 0;
  while (p < labels.size()) {
    if (!valid[p]) {
      ++p;
      continue;
    }
    std::size_t q = p + 1;
    while (q < labels.size() && valid[q] && labels[q] == labels[p]) ++q;
    runs.push_back({p, q});
    p = q;
  }
  return runs;
}

std::size_t window_length(const MaskingOptions& o, std::size_t shot_len) {
  if (o.method == MaskingMethod::kFixedWindow) return std::min(o.fixed_window, shot_len);
  // The small slack keeps exact products such as 0.3 * 10 from rounding up.
  const double raw = std::ceil(o.window_ratio * static_cast<double>(shot_len) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, shot_len);
}

void check_options(const MaskingOptions& o) {
  if (!(o.mask_ratio > 0.0 && o.mask_ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "mask ratio must lie in (0, 1)");
  }
  if (!(o.window_ratio > 0.0 && o.window_ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "window ratio must lie in (0, 1]");
  }
  if (o.method == MaskingMethod::kFixedWindow && o.fixed_window == 0) {
    throw Error(ErrorCode::kInvalidArgument, "fixed window size must be positive");
  }
  if (o.p_mask < 0 || o.p_replace < 0 || o.p_mask + o.p_replace > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "disposition probabilities must be a distribution");
  }
}

void random_plan(MaskPlan& plan, std::span<const std::uint8_t> valid, const MaskingOptions& o, Rng& rng) {
  for (std::size_t p = 0; p < valid.size(); ++p) {
    if (!valid[p] || !rng.bernoulli(o.mask_ratio)) continue;
    plan.candidate_windows.push_back({p, 1, Disposition::kMask, 0});
    plan.dispositions[p].kind = Disposition::kMask;
  }
}

}  // namespace

MaskingMethod parse_masking_method(const std::string& name) {
  if (name == "dynamic") return MaskingMethod::kDynamicWindow;
  if (name == "fixed") return MaskingMethod::kFixedWindow;
  if (name == "random") return MaskingMethod::kRandom;
  throw Error(ErrorCode::kInvalidArgument, "unknown masking method '" + name + "'");
}

std::string masking_method_name(MaskingMethod method) {
  switch (method) {
    case MaskingMethod::kDynamicWindow: return "dynamic";
    case MaskingMethod::kFixedWindow: return "fixed";
    case MaskingMethod::kRandom: return "random";
  }
  return "dynamic";
}

MaskPlan plan_masking(std::span<const std::int32_t> shot_labels, std::span<const std::uint8_t> valid_mask,
                      const MaskingOptions& options, std::uint64_t seed) {
  check_options(options);
  if (shot_labels.size() != valid_mask.size()) {
    throw Error(ErrorCode::kPlanMismatch, "shot labels and valid mask differ in length");
  }
  const std::size_t length = valid_mask.size();
  MaskPlan plan;
  plan.rng_seed = seed;
  plan.dispositions.assign(length, FrameAction{});
  plan.valid_frames = static_cast<std::size_t>(std::count(valid_mask.begin(), valid_mask.end(), 1));
  if (plan.valid_frames == 0) {
    throw Error(ErrorCode::kInsufficientMaskableFrames, "sub-sequence has no valid frames");
  }

  Rng window_rng(derive_seed(seed, "mask.window"));
  Rng disposition_rng(derive_seed(seed, "mask.disposition"));

  if (options.method == MaskingMethod::kRandom) {
    random_plan(plan, valid_mask, options, window_rng);
    return plan;
  }

  const auto runs = shot_runs(shot_labels, valid_mask);
  const double threshold = options.mask_ratio * static_cast<double>(plan.valid_frames);
  std::vector<std::uint8_t> taken(length, 0);
  std::vector<std::size_t> starts;
  std::size_t covered = 0;
  int failures = 0;
  while (static_cast<double>(covered) < threshold) {
    const Span shot = runs[static_cast<std::size_t>(
        window_rng.uniform_int(0, static_cast<std::int64_t>(runs.size()) - 1))];
    const std::size_t len = window_length(options, shot.size());
    starts.clear();
    for (std::size_t s = shot.begin; s + len <= shot.end; ++s) {
      if (std::none_of(taken.begin() + s, taken.begin() + s + len, [](auto t) { return t != 0; })) {
        starts.push_back(s);
      }
    }
    if (starts.empty()) {
      if (++failures > options.max_retries) {
        throw Error(ErrorCode::kInsufficientMaskableFrames,
                    "could not place a window after " + std::to_string(options.max_retries) + " retries");
      }
      continue;
    }
    failures = 0;
    const std::size_t s = starts[static_cast<std::size_t>(
        window_rng.uniform_int(0, static_cast<std::int64_t>(starts.size()) - 1))];
    std::fill(taken.begin() + s, taken.begin() + s + len, 1);
    plan.candidate_windows.push_back({s, len, Disposition::kKeep, 0});
    covered += len;
  }

  // Maximal valid spans free of candidates; replacement sources come from here.
  std::vector<Span> free_spans;
  for (std::size_t p = 0; p < length;) {
    if (!valid_mask[p] || taken[p]) {
      ++p;
      continue;
    }
    std::size_t q = p + 1;
    while (q < length && valid_mask[q] && !taken[q]) ++q;
    free_spans.push_back({p, q});
    p = q;
  }

  std::vector<Span> fitting;
  for (auto& w : plan.candidate_windows) {
    const double u = disposition_rng.uniform();
    if (u < options.p_mask) {
      w.disposition = Disposition::kMask;
    } else if (u < options.p_mask + options.p_replace) {
      fitting.clear();
      for (const auto& f : free_spans) {
        if (f.size() >= w.length) fitting.push_back(f);
      }
      if (fitting.empty()) {
        w.disposition = Disposition::kMask;
      } else {
        const Span f = fitting[static_cast<std::size_t>(
            disposition_rng.uniform_int(0, static_cast<std::int64_t>(fitting.size()) - 1))];
        w.disposition = Disposition::kReplace;
        w.source_start = f.begin + static_cast<std::size_t>(disposition_rng.uniform_int(
                                       0, static_cast<std::int64_t>(f.size() - w.length)));
      }
    } else {
      w.disposition = Disposition::kKeep;
    }
    for (std::size_t k = 0; k < w.length; ++k) {
      auto& action = plan.dispositions[w.start + k];
      action.kind = w.disposition;
      if (w.disposition == Disposition::kReplace) {
        action.source = static_cast<std::int64_t>(w.source_start + k);
      }
    }
  }
  return plan;
}

template <typename T>
Matrix<T> apply_mask(const SubSequence<T>& sub, const MaskPlan& plan, std::span<const T> token) {
  if (plan.dispositions.size() != sub.length()) {
    throw Error(ErrorCode::kPlanMismatch, "plan length " + std::to_string(plan.dispositions.size()) +
                                              " != sub-sequence length " + std::to_string(sub.length()));
  }
  if (token.size() != sub.frames.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "mask token width differs from embedding width");
  }
  Matrix<T> out = sub.frames;
  for (std::size_t p = 0; p < sub.length(); ++p) {
    const auto& a = plan.dispositions[p];
    auto dst = out.row(p);
    if (a.kind == Disposition::kMask) {
      std::copy(token.begin(), token.end(), dst.begin());
    } else if (a.kind == Disposition::kReplace) {
      const auto src = sub.frames.row(static_cast<std::size_t>(a.source));
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  return out;
}

double mask_fraction(const MaskPlan& plan) {
  if (plan.valid_frames == 0) return 0.0;
  std::size_t total = 0;
  for (const auto& w : plan.candidate_windows) total += w.length;
  return static_cast<double>(total) / static_cast<double>(plan.valid_frames);
}

template Matrix<float> apply_mask<float>(const SubSequence<float>&, const MaskPlan&, std::span<const float>);
template Matrix<double> apply_mask<double>(const SubSequence<double>&, const MaskPlan&, std::span<const double>);

}  // namespace vsum
