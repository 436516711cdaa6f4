#include <atomic>
#include <stdexcept>
#include <string>

#include "wavekin/simd/kernels.hpp"

namespace wavekin::simd {

namespace {

constexpr KernelTable kScalarTable{Isa::Scalar, &scalar::slab, &scalar::overflow, &scalar::trig};
#if defined(WAVEKIN_BUILD_AVX2)
constexpr KernelTable kAvx2Table{Isa::Avx2, &avx2::slab, &avx2::overflow, &avx2::trig};
#endif

bool cpu_has_avx2() noexcept {
#if defined(WAVEKIN_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

}  // namespace

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2: return cpu_has_avx2();
  }
  return false;
}

Isa detected_isa() noexcept { return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("instruction set '" + std::string(isa_name(isa)) +
                                "' is not available on this machine/build");
  }
  active().store(isa, std::memory_order_relaxed);
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::Scalar};
  if (isa_available(Isa::Avx2)) out.push_back(Isa::Avx2);
  return out;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::Scalar;
  if (name == "avx2") return Isa::Avx2;
  throw std::invalid_argument("unknown instruction set '" + std::string(name) +
                              "' (expected scalar, avx2)");
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("instruction set '" + std::string(isa_name(isa)) +
                                "' is not available on this machine/build");
  }
#if defined(WAVEKIN_BUILD_AVX2)
  if (isa == Isa::Avx2) return kAvx2Table;
#endif
  return kScalarTable;
}

const KernelTable& kernels() noexcept {
#if defined(WAVEKIN_BUILD_AVX2)
  if (active_isa() == Isa::Avx2) return kAvx2Table;
#endif
  return kScalarTable;
}

}  // namespace wavekin::simd
