#include <cmath>

#include "wavekin/simd/kernels.hpp"

namespace wavekin::simd::scalar {

double slab(double coeff, double scale, double offset, const double* third, const double* u,
            double* gain, std::size_t s, std::size_t l_begin, std::size_t l_end) {
  double total = 0.0;
  for (std::size_t l = l_begin; l < l_end; ++l) {
    const double c = coeff * (scale * third[l] + offset) * u[l];
    gain[l] += c;
    gain[s - l] += c;
    total += c;
  }
  return total;
}

OverflowSums overflow(double coeff, double scale, double offset, const double* third,
                      const double* u, double* gain, std::size_t s, double h, std::size_t l_end) {
  OverflowSums r;
  for (std::size_t l = 0; l < l_end; ++l) {
    const double c = coeff * (scale * third[l] + offset) * u[l];
    gain[l] += c;
    r.mass += c;
    r.phi += c * (1.0 + h * static_cast<double>(s - l));
  }
  return r;
}

void trig(const double* omega, const double* weight, std::size_t n, double* cos_acc,
          double* sin_acc) {
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weight[i];
    for (std::size_t k = 0; k < kTrigFrequencies; ++k) {
      const double x = omega[i] * (static_cast<double>(k + 1) / 8.0);
      cos_acc[k] += w * std::cos(x);
      sin_acc[k] += w * std::sin(x);
    }
  }
}

}  // namespace wavekin::simd::scalar
