#include <atomic>
#include <cstdlib>
#include <string>

#include "vsum/error.hpp"
#include "vsum/simd/kernels.hpp"

namespace vsum::simd {

namespace {

bool cpu_has_avx2() {
#if defined(VSUM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool has = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return has;
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("VSUM_ISA")) {
    if (auto isa = parse_isa(env); isa && isa_available(*isa)) return *isa;
  }
  return detected_isa();
}

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> slot{initial_isa()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

std::optional<Isa> parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::kScalar;
  if (name == "avx2") return Isa::kAvx2;
  if (name == "neon") return Isa::kNeon;
  return std::nullopt;
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2: return cpu_has_avx2();
    case Isa::kNeon:
#if defined(VSUM_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() {
  static const Isa best = [] {
    if (isa_available(Isa::kAvx2)) return Isa::kAvx2;
    if (isa_available(Isa::kNeon)) return Isa::kNeon;
    return Isa::kScalar;
  }();
  return best;
}

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw Error(ErrorCode::kInvalidArgument,
                "instruction set '" + std::string(isa_name(isa)) + "' is not available");
  }
  active_slot().store(isa, std::memory_order_relaxed);
}

template <typename T>
const KernelTable<T>& kernels_for(Isa isa) {
  switch (isa) {
#if defined(VSUM_HAVE_AVX2)
    case Isa::kAvx2:
      if (cpu_has_avx2()) return detail::avx2_table<T>();
      break;
#endif
#if defined(VSUM_HAVE_NEON)
    case Isa::kNeon: return detail::neon_table<T>();
#endif
    default: break;
  }
  return detail::scalar_table<T>();
}

template const KernelTable<float>& kernels_for<float>(Isa);
template const KernelTable<double>& kernels_for<double>(Isa);

}  // namespace vsum::simd
