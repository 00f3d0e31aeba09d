// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "vsum/simd/kernels.hpp"

namespace vsum::simd::detail {

namespace {

struct F32 {
  using T = float;
  using V = __m256;
  static constexpr std::size_t kLanes = 8;
  static V zero() { return _mm256_setzero_ps(); }
  static V load(const T* p) { return _mm256_loadu_ps(p); }
  static void store(T* p, V v) { _mm256_storeu_ps(p, v); }
  static V set1(T v) { return _mm256_set1_ps(v); }
  static V fmadd(V a, V b, V c) { return _mm256_fmadd_ps(a, b, c); }
  static V add(V a, V b) { return _mm256_add_ps(a, b); }
  static V mul(V a, V b) { return _mm256_mul_ps(a, b); }
  static T hsum(V v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 shuf = _mm_movehdup_ps(lo);
    __m128 sums = _mm_add_ps(lo, shuf);
    shuf = _mm_movehl_ps(shuf, sums);
    sums = _mm_add_ss(sums, shuf);
    return _mm_cvtss_f32(sums);
  }
};

struct F64 {
  using T = double;
  using V = __m256d;
  static constexpr std::size_t kLanes = 4;
  static V zero() { return _mm256_setzero_pd(); }
  static V load(const T* p) { return _mm256_loadu_pd(p); }
  static void store(T* p, V v) { _mm256_storeu_pd(p, v); }
  static V set1(T v) { return _mm256_set1_pd(v); }
  static V fmadd(V a, V b, V c) { return _mm256_fmadd_pd(a, b, c); }
  static V add(V a, V b) { return _mm256_add_pd(a, b); }
  static V mul(V a, V b) { return _mm256_mul_pd(a, b); }
  static T hsum(V v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d high64 = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, high64));
  }
};

// Accumulation order: two vector accumulators over 2*kLanes blocks, one more
// kLanes block into the first accumulator, horizontal sum, then scalar tail.
// dot4 repeats that order per row so both entry points agree bitwise.
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
  using V = typename S::V;
  constexpr std::size_t W = S::kLanes;
  V a0 = S::zero(), a1 = S::zero(), c0 = S::zero(), c1 = S::zero();
  V e0 = S::zero(), e1 = S::zero(), g0 = S::zero(), g1 = S::zero();
  std::size_t i = 0;
  for (; i + 2 * W <= n; i += 2 * W) {
    const V x0 = S::load(a + i);
    const V x1 = S::load(a + i + W);
    a0 = S::fmadd(x0, S::load(b0 + i), a0);
    a1 = S::fmadd(x1, S::load(b0 + i + W), a1);
    c0 = S::fmadd(x0, S::load(b1 + i), c0);
    c1 = S::fmadd(x1, S::load(b1 + i + W), c1);
    e0 = S::fmadd(x0, S::load(b2 + i), e0);
    e1 = S::fmadd(x1, S::load(b2 + i + W), e1);
    g0 = S::fmadd(x0, S::load(b3 + i), g0);
    g1 = S::fmadd(x1, S::load(b3 + i + W), g1);
  }
  if (i + W <= n) {
    const V x0 = S::load(a + i);
    a0 = S::fmadd(x0, S::load(b0 + i), a0);
    c0 = S::fmadd(x0, S::load(b1 + i), c0);
    e0 = S::fmadd(x0, S::load(b2 + i), e0);
    g0 = S::fmadd(x0, S::load(b3 + i), g0);
    i += W;
  }
  out[0] = S::hsum(S::add(a0, a1));
  out[1] = S::hsum(S::add(c0, c1));
  out[2] = S::hsum(S::add(e0, e1));
  out[3] = S::hsum(S::add(g0, g1));
  for (; i < n; ++i) {
    out[0] += a[i] * b0[i];
    out[1] += a[i] * b1[i];
    out[2] += a[i] * b2[i];
    out[3] += a[i] * b3[i];
  }
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
const KernelTable<T>& avx2_table() {
  using S = typename Traits<T>::S;
  static const KernelTable<T> table{&dot<S>, &dot4<S>, &axpy<S>, &scale<S>};
  return table;
}

template const KernelTable<float>& avx2_table<float>();
template const KernelTable<double>& avx2_table<double>();

}  // namespace vsum::simd::detail
