// AArch64 baseline NEON; no runtime check needed on that target.
#include <arm_neon.h>

#include "vsum/simd/kernels.hpp"

namespace vsum::simd::detail {

namespace {

struct F32 {
  using T = float;
  using V = float32x4_t;
  static constexpr std::size_t kLanes = 4;
  static V zero() { return vdupq_n_f32(0.0f); }
  static V load(const T* p) { return vld1q_f32(p); }
  static void store(T* p, V v) { vst1q_f32(p, v); }
  static V set1(T v) { return vdupq_n_f32(v); }
  static V fmadd(V a, V b, V c) { return vfmaq_f32(c, a, b); }
  static V add(V a, V b) { return vaddq_f32(a, b); }
  static V mul(V a, V b) { return vmulq_f32(a, b); }
  static T hsum(V v) { return vaddvq_f32(v); }
};

struct F64 {
  using T = double;
  using V = float64x2_t;
  static constexpr std::size_t kLanes = 2;
  static V zero() { return vdupq_n_f64(0.0); }
  static V load(const T* p) { return vld1q_f64(p); }
  static void store(T* p, V v) { vst1q_f64(p, v); }
  static V set1(T v) { return vdupq_n_f64(v); }
  static V fmadd(V a, V b, V c) { return vfmaq_f64(c, a, b); }
  static V add(V a, V b) { return vaddq_f64(a, b); }
  static V mul(V a, V b) { return vmulq_f64(a, b); }
  static T hsum(V v) { return vaddvq_f64(v); }
};

template <typename S>
typename S::T dot(const typename S::T* a, const typename S::T* b, std::size_t n) {
  constexpr std::size_t W = S::kLanes;
  typename S::V acc0 = S::zero();
  typename S::V acc1 = S::zero();
  std::size_t i = 0;
  for (; i + 2 * W <= n; i += 2 * W) {
    acc0 = S::fmadd(S::load(a + i), S::load(b + i), acc0);
    acc1 = S::fmadd(S::load(a + i + W), S::load(b + i + W), acc1);
  }
  if (i + W <= n) {
    acc0 = S::fmadd(S::load(a + i), S::load(b + i), acc0);
    i += W;
  }
  typename S::T sum = S::hsum(S::add(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

template <typename S>
void dot4(const typename S::T* a, const typename S::T* b0, const typename S::T* b1,
          const typename S::T* b2, const typename S::T* b3, std::size_t n, typename S::T* out) {
  out[0] = dot<S>(a, b0, n);
  out[1] = dot<S>(a, b1, n);
  out[2] = dot<S>(a, b2, n);
  out[3] = dot<S>(a, b3, n);
}

template <typename S>
void axpy(typename S::T alpha, const typename S::T* x, typename S::T* y, std::size_t n) {
  constexpr std::size_t W = S::kLanes;
  const typename S::V va = S::set1(alpha);
  std::size_t i = 0;
  for (; i + W <= n; i += W) S::store(y + i, S::fmadd(va, S::load(x + i), S::load(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

template <typename S>
void scale(typename S::T alpha, typename S::T* x, std::size_t n) {
  constexpr std::size_t W = S::kLanes;
  const typename S::V va = S::set1(alpha);
  std::size_t i = 0;
  for (; i + W <= n; i += W) S::store(x + i, S::mul(va, S::load(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

template <typename T>
struct Traits;
template <>
struct Traits<float> {
  using S = F32;
};
template <>
struct Traits<double> {
  using S = F64;
};

}  // namespace

template <typename T>
const KernelTable<T>& neon_table() {
  using S = typename Traits<T>::S;
  static const KernelTable<T> table{&dot<S>, &dot4<S>, &axpy<S>, &scale<S>};
  return table;
}

template const KernelTable<float>& neon_table<float>();
template const KernelTable<double>& neon_table<double>();

}  // namespace vsum::simd::detail
