#include "vsum/optim.hpp"

#include <cmath>

#include "vsum/error.hpp"

namespace vsum {

template <typename T>
void AdamW<T>::step(ParamStore<T>& params, double lr) {
  if (state_.m.empty()) {
    for (const auto& p : params) {
      state_.m.emplace_back(p.value.size(), T(0));
      state_.v.emplace_back(p.value.size(), T(0));
    }
  }
  if (state_.m.size() != params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "optimizer state does not match the parameter set");
  }
  ++state_.step;
  const auto t = static_cast<double>(state_.step);
  const T b1 = static_cast<T>(options_.beta1);
  const T b2 = static_cast<T>(options_.beta2);
  const T corr1 = static_cast<T>(1.0 - std::pow(options_.beta1, t));
  const T corr2 = static_cast<T>(1.0 - std::pow(options_.beta2, t));
  const T decay = static_cast<T>(1.0 - lr * options_.weight_decay);
  const T lr_t = static_cast<T>(lr);
  const T eps = static_cast<T>(options_.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = state_.m[i];
    auto& v = state_.v[i];
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const T g = p.grad[j];
      m[j] = b1 * m[j] + (T(1) - b1) * g;
      v[j] = b2 * v[j] + (T(1) - b2) * g * g;
      const T m_hat = m[j] / corr1;
      const T v_hat = v[j] / corr2;
      p.value[j] = p.value[j] * decay - lr_t * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace vsum
