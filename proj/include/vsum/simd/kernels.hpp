#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace vsum::simd {

enum class Isa { kScalar, kAvx2, kNeon };

// Inner-loop primitives every dense layer is built from. Each ISA provides the
// same table; the scalar table is the reference the others are tested against.
template <typename T>
struct KernelTable {
  // sum_i a[i] * b[i]
  T (*dot)(const T* a, const T* b, std::size_t n);
  // out[r] = dot(a, b[r]) for r in 0..3; bitwise equal to four dot() calls
  // on the same table.
  void (*dot4)(const T* a, const T* b0, const T* b1, const T* b2, const T* b3, std::size_t n,
               T* out);
  // y += alpha * x
  void (*axpy)(T alpha, const T* x, T* y, std::size_t n);
  // x *= alpha
  void (*scale)(T alpha, T* x, std::size_t n);
};

std::string_view isa_name(Isa isa);
std::optional<Isa> parse_isa(std::string_view name);

// Best ISA supported by both the build and the running CPU.
Isa detected_isa();
// ISA used by kernels(). Defaults to detected_isa(), or VSUM_ISA from the
// environment when set to a supported value.
Isa active_isa();
// Throws vsum::Error(kInvalidArgument) if the ISA is unavailable here.
void set_active_isa(Isa isa);
bool isa_available(Isa isa);

template <typename T>
const KernelTable<T>& kernels_for(Isa isa);

template <typename T>
const KernelTable<T>& kernels() {
  return kernels_for<T>(active_isa());
}

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
  return kernels<T>().dot(a.data(), b.data(), a.size());
}

template <typename T>
void axpy(T alpha, std::span<const T> x, std::span<T> y) {
  kernels<T>().axpy(alpha, x.data(), y.data(), x.size());
}

namespace detail {
template <typename T>
const KernelTable<T>& scalar_table();
#if defined(VSUM_HAVE_AVX2)
template <typename T>
const KernelTable<T>& avx2_table();
#endif
#if defined(VSUM_HAVE_NEON)
template <typename T>
const KernelTable<T>& neon_table();
#endif
}  // namespace detail

}  // namespace vsum::simd
