// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the dispatcher has confirmed CPU support.
#include <immintrin.h>

#include <cmath>

#include "wavekin/simd/kernels.hpp"

namespace wavekin::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// (a, b, c, d) -> (d, c, b, a)
inline __m256d reverse(__m256d v) { return _mm256_permute4x64_pd(v, 0x1B); }

}  // namespace

double slab(double coeff, double scale, double offset, const double* third, const double* u,
            double* gain, std::size_t s, std::size_t l_begin, std::size_t l_end) {
  const __m256d vcoeff = _mm256_set1_pd(coeff);
  const __m256d vscale = _mm256_set1_pd(scale);
  const __m256d voffset = _mm256_set1_pd(offset);
  __m256d acc = _mm256_setzero_pd();
  std::size_t l = l_begin;
  for (; l + 4 <= l_end; l += 4) {
    const __m256d k = _mm256_fmadd_pd(vscale, _mm256_loadu_pd(third + l), voffset);
    const __m256d c = _mm256_mul_pd(_mm256_mul_pd(vcoeff, k), _mm256_loadu_pd(u + l));
    _mm256_storeu_pd(gain + l, _mm256_add_pd(_mm256_loadu_pd(gain + l), c));
    // outputs s-l-3 .. s-l, in ascending address order
    double* out = gain + (s - l - 3);
    _mm256_storeu_pd(out, _mm256_add_pd(_mm256_loadu_pd(out), reverse(c)));
    acc = _mm256_add_pd(acc, c);
  }
  double total = hsum(acc);
  for (; l < l_end; ++l) {
    const double c = coeff * (scale * third[l] + offset) * u[l];
    gain[l] += c;
    gain[s - l] += c;
    total += c;
  }
  return total;
}

OverflowSums overflow(double coeff, double scale, double offset, const double* third,
                      const double* u, double* gain, std::size_t s, double h, std::size_t l_end) {
  const __m256d vcoeff = _mm256_set1_pd(coeff);
  const __m256d vscale = _mm256_set1_pd(scale);
  const __m256d voffset = _mm256_set1_pd(offset);
  const __m256d vh = _mm256_set1_pd(h);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d lane = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  __m256d mass = _mm256_setzero_pd();
  __m256d phi = _mm256_setzero_pd();
  std::size_t l = 0;
  for (; l + 4 <= l_end; l += 4) {
    const __m256d k = _mm256_fmadd_pd(vscale, _mm256_loadu_pd(third + l), voffset);
    const __m256d c = _mm256_mul_pd(_mm256_mul_pd(vcoeff, k), _mm256_loadu_pd(u + l));
    _mm256_storeu_pd(gain + l, _mm256_add_pd(_mm256_loadu_pd(gain + l), c));
    const __m256d target =
        _mm256_sub_pd(_mm256_set1_pd(static_cast<double>(s - l)), lane);
    mass = _mm256_add_pd(mass, c);
    phi = _mm256_fmadd_pd(c, _mm256_fmadd_pd(vh, target, one), phi);
  }
  OverflowSums r{hsum(mass), hsum(phi)};
  for (; l < l_end; ++l) {
    const double c = coeff * (scale * third[l] + offset) * u[l];
    gain[l] += c;
    r.mass += c;
    r.phi += c * (1.0 + h * static_cast<double>(s - l));
  }
  return r;
}

void trig(const double* omega, const double* weight, std::size_t n, double* cos_acc,
          double* sin_acc) {
  alignas(32) __m256d cacc[kTrigFrequencies];
  alignas(32) __m256d sacc[kTrigFrequencies];
  for (std::size_t k = 0; k < kTrigFrequencies; ++k) {
    cacc[k] = _mm256_setzero_pd();
    sacc[k] = _mm256_setzero_pd();
  }
  std::size_t i = 0;
  alignas(32) double c1s[4];
  alignas(32) double s1s[4];
  for (; i + 4 <= n; i += 4) {
    // base angle omega / 8; higher harmonics by rotation
    for (int q = 0; q < 4; ++q) {
      const double x = omega[i + q] / 8.0;
      c1s[q] = std::cos(x);
      s1s[q] = std::sin(x);
    }
    const __m256d c1 = _mm256_load_pd(c1s);
    const __m256d s1 = _mm256_load_pd(s1s);
    const __m256d w = _mm256_loadu_pd(weight + i);
    __m256d ck = c1;
    __m256d sk = s1;
    for (std::size_t k = 0; k < kTrigFrequencies; ++k) {
      cacc[k] = _mm256_fmadd_pd(w, ck, cacc[k]);
      sacc[k] = _mm256_fmadd_pd(w, sk, sacc[k]);
      const __m256d cn = _mm256_fmsub_pd(ck, c1, _mm256_mul_pd(sk, s1));
      const __m256d sn = _mm256_fmadd_pd(sk, c1, _mm256_mul_pd(ck, s1));
      ck = cn;
      sk = sn;
    }
  }
  for (std::size_t k = 0; k < kTrigFrequencies; ++k) {
    cos_acc[k] += hsum(cacc[k]);
    sin_acc[k] += hsum(sacc[k]);
  }
  if (i < n) scalar::trig(omega + i, weight + i, n - i, cos_acc, sin_acc);
}

}  // namespace wavekin::simd::avx2
