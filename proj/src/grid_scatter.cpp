#include <algorithm>
#include <stdexcept>
#include <string>

#include "wavekin/collision.hpp"

namespace wavekin {

CollisionGrid::CollisionGrid(Kernel k, double h, std::size_t cells)
    : kernel_(std::move(k)), h_(h), cells_(cells) {
  if (!(h > 0.0)) throw std::invalid_argument("CollisionGrid: h must be > 0");
  if (cells == 0) throw std::invalid_argument("CollisionGrid: need at least one cell");
  third_.resize(cells);
  for (std::size_t l = 0; l < cells; ++l) third_[l] = kernel_.third_factor(static_cast<double>(l) * h);
  slices_.resize(cells * cells);
  for (std::size_t i = 0; i < cells; ++i) {
    for (std::size_t j = 0; j < cells; ++j) {
      slices_[i * cells + j] = kernel_.slice(static_cast<double>(i) * h, static_cast<double>(j) * h);
    }
  }
}

namespace {

void check_len(std::size_t out_len, std::size_t cells) {
  if (out_len < cells || out_len > 2 * cells - 1) {
    throw std::invalid_argument("CollisionGrid: out_len " + std::to_string(out_len) +
                                " outside [" + std::to_string(cells) + ", " +
                                std::to_string(2 * cells - 1) + "]");
  }
}

}  // namespace

void CollisionGrid::scatter(std::span<const double> u, std::size_t out_len, Truncation mode,
                            Result& out, const simd::KernelTable& table) const {
  const std::size_t m = cells_;
  if (u.size() != m) throw std::invalid_argument("CollisionGrid::scatter: u has wrong length");
  check_len(out_len, m);
  out.gain.assign(out_len, 0.0);
  out.loss.assign(m, 0.0);
  out.overflow_mass = 0.0;
  out.overflow_phi = 0.0;

  // Unordered pairs i <= j; the ordered sum counts i != j twice, which cancels
  // the 1/2 prefactor.
  for (std::size_t i = 0; i < m; ++i) {
    if (u[i] == 0.0) continue;
    for (std::size_t j = i; j < m; ++j) {
      if (u[j] == 0.0) continue;
      const double coeff = (i == j ? 0.5 : 1.0) * u[i] * u[j];
      const KernelSlice& sl = slices_[i * m + j];
      const std::size_t s = i + j;
      const std::size_t l_end = std::min(s + 1, m);
      const std::size_t l_lo = std::min(s + 1 > out_len ? s + 1 - out_len : 0, l_end);
      double total = 0.0;
      if (l_lo > 0 && mode == Truncation::Overflow) {
        const auto ov = table.overflow(coeff, sl.scale, sl.offset, third_.data(), u.data(),
                                       out.gain.data(), s, h_, l_lo);
        total += ov.mass;
        out.overflow_mass += ov.mass;
        out.overflow_phi += ov.phi;
      }
      if (l_lo < l_end) {
        total += table.slab(coeff, sl.scale, sl.offset, third_.data(), u.data(), out.gain.data(), s,
                            l_lo, l_end);
      }
      out.loss[i] += total;
      out.loss[j] += total;
    }
  }
}

std::vector<double> CollisionGrid::loss_rate(std::span<const double> u, std::size_t out_len,
                                             Truncation mode) const {
  const std::size_t m = cells_;
  if (u.size() != m) throw std::invalid_argument("CollisionGrid::loss_rate: u has wrong length");
  check_len(out_len, m);
  // prefix sums of third[l] u[l] and u[l]
  std::vector<double> pa(m + 1, 0.0), pu(m + 1, 0.0);
  for (std::size_t l = 0; l < m; ++l) {
    pa[l + 1] = pa[l] + third_[l] * u[l];
    pu[l + 1] = pu[l] + u[l];
  }
  std::vector<double> rho(m, 0.0);
  for (std::size_t c = 0; c < m; ++c) {
    double r = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (u[j] == 0.0) continue;
      const std::size_t s = c + j;
      const std::size_t hi = std::min(s + 1, m);
      std::size_t lo = 0;
      if (mode == Truncation::Conservative && s + 1 > out_len) lo = std::min(s + 1 - out_len, hi);
      const KernelSlice& sl = slices_[c * m + j];
      r += u[j] * (sl.scale * (pa[hi] - pa[lo]) + sl.offset * (pu[hi] - pu[lo]));
    }
    rho[c] = r;
  }
  return rho;
}

double CollisionGrid::collision_norm_constant() const {
  const std::size_t m = cells_;
  double best = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const KernelSlice& sl = slices_[i * m + j];
      const std::size_t s = i + j;
      for (std::size_t l = 0; l <= std::min(s, m - 1); ++l) {
        const double k = sl.scale * third_[l] + sl.offset;
        const std::size_t o = s - l;
        const double w = o < m ? 1.0 : 1.0 + h_ * static_cast<double>(o);
        best = std::max(best, 0.5 * k * (3.0 + w));
      }
    }
  }
  return best;
}

}  // namespace wavekin
