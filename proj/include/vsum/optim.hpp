#pragma once

#include <cstdint>
#include <vector>

#include "vsum/model.hpp"

namespace vsum {

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

template <typename T>
struct AdamWState {
  std::uint64_t step = 0;
  std::vector<std::vector<T>> m;  // first moments, parallel to the ParamStore
  std::vector<std::vector<T>> v;  // second moments
  bool operator==(const AdamWState&) const = default;
};

// Adaptive-moment optimizer with decoupled weight decay.
template <typename T>
class AdamW {
 public:
  explicit AdamW(AdamWOptions options = {}) : options_(options) {}

  // Applies one update from the gradients currently stored in `params`.
  void step(ParamStore<T>& params, double lr);

  const AdamWOptions& options() const { return options_; }
  const AdamWState<T>& state() const { return state_; }
  void set_state(AdamWState<T> state) { state_ = std::move(state); }

 private:
  AdamWOptions options_;
  AdamWState<T> state_;
};

}  // namespace vsum
