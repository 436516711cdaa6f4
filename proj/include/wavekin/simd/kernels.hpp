// Data-parallel inner loops with a scalar reference and ISA-specific variants.
//
// The scalar versions are the reference semantics; every variant must agree
// with them to rounding (see tests/test_simd.cpp). Selection happens once at
// startup from CPUID and can be overridden for testing or reproducibility.
#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace wavekin::simd {

enum class Isa { Scalar, Avx2 };

struct OverflowSums {
  double mass = 0.0;  // sum of c over the slab
  double phi = 0.0;   // sum of c * (1 + h * (s - l)), the phi-mass of the escaping outputs
};

/// One (i, j) slab of the grid collision scatter, targets inside the grid:
///   for l in [l_begin, l_end):
///     c = coeff * (scale * third[l] + offset) * u[l]
///     gain[l] += c; gain[s - l] += c
/// Returns the sum of c. Requires l_end <= s + 1.
using SlabFn = double (*)(double coeff, double scale, double offset, const double* third,
                          const double* u, double* gain, std::size_t s, std::size_t l_begin,
                          std::size_t l_end);

/// Same slab for l in [0, l_end) where the output cell s - l lies outside the
/// grid: only the catalyst gain[l] is written; the output is summed as mass
/// and as phi-mass with phi(w) = w + 1 at w = (s - l) * h.
using OverflowSlabFn = OverflowSums (*)(double coeff, double scale, double offset,
                                        const double* third, const double* u, double* gain,
                                        std::size_t s, double h, std::size_t l_end);

/// Trigonometric moments of an atomic measure at the weak-metric frequencies
/// a_k = (k + 1) / 8, k < 64:
///   cos_acc[k] += sum_i weight[i] * cos(a_k * omega[i])
///   sin_acc[k] += sum_i weight[i] * sin(a_k * omega[i])
using TrigFn = void (*)(const double* omega, const double* weight, std::size_t n,
                        double* cos_acc, double* sin_acc);

struct KernelTable {
  Isa isa;
  SlabFn slab;
  OverflowSlabFn overflow;
  TrigFn trig;
};

inline constexpr std::size_t kTrigFrequencies = 64;

/// Best ISA supported by both the build and the running CPU.
Isa detected_isa() noexcept;
Isa active_isa() noexcept;
/// Throws std::invalid_argument if `isa` is not available.
void set_active_isa(Isa isa);
bool isa_available(Isa isa) noexcept;
std::vector<Isa> available_isas();

std::string_view isa_name(Isa isa) noexcept;
/// "scalar" | "avx2"; throws std::invalid_argument otherwise.
Isa parse_isa(std::string_view name);

const KernelTable& kernels() noexcept;
const KernelTable& kernels_for(Isa isa);

namespace scalar {
double slab(double coeff, double scale, double offset, const double* third, const double* u,
            double* gain, std::size_t s, std::size_t l_begin, std::size_t l_end);
OverflowSums overflow(double coeff, double scale, double offset, const double* third,
                      const double* u, double* gain, std::size_t s, double h, std::size_t l_end);
void trig(const double* omega, const double* weight, std::size_t n, double* cos_acc,
          double* sin_acc);
}  // namespace scalar

#if defined(WAVEKIN_BUILD_AVX2)
namespace avx2 {
double slab(double coeff, double scale, double offset, const double* third, const double* u,
            double* gain, std::size_t s, std::size_t l_begin, std::size_t l_end);
OverflowSums overflow(double coeff, double scale, double offset, const double* third,
                      const double* u, double* gain, std::size_t s, double h, std::size_t l_end);
void trig(const double* omega, const double* weight, std::size_t n, double* cos_acc,
          double* sin_acc);
}  // namespace avx2
#endif

}  // namespace wavekin::simd
