// The weak collision operator Q and its relatives, on atomic measures.
//
// All forms sum over *ordered* triples (w1, w2, w3) in the interaction domain
//   D = { w1 + w2 >= w3 }
// with a prefactor 1/2 and the bracket
//   f(w1 + w2 - w3) + f(w3) - f(w1) - f(w2).
// The same single predicate is used for the truncated operator L^B.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wavekin/kernels.hpp"
#include "wavekin/measures.hpp"
#include "wavekin/simd/kernels.hpp"

namespace wavekin {

using TestFn = std::function<double(double)>;

inline bool in_domain(double w1, double w2, double w3) noexcept {
  return w1 >= 0.0 && w2 >= 0.0 && w3 >= 0.0 && w1 + w2 >= w3;
}

/// <f, Q(mu, mu, mu)> by direct O(m^3) enumeration.
double q_pairing(const DiscreteMeasure& mu, const Kernel& k, const TestFn& f);

/// Q(mu, mu, mu) materialised as a signed grid measure. Requires grid mode.
DiscreteMeasure q_measure(const DiscreteMeasure& mu, const Kernel& k);

/// <f, Q^(n)(X)> for an empirical measure X with n unit-1/n particles: the
/// trilinear pairing minus the contribution of triples whose first two slots
/// are the same particle.
double q_counting(const DiscreteMeasure& x, const Kernel& k, const TestFn& f, std::uint64_t n);

/// Only the diagonal part removed by q_counting:
///   (1/n) * 1/2 * sum_{2a >= c} (f(2a - c) + f(c) - 2 f(a)) K(a, a, c) X(a) X(c)
double q_counting_diagonal(const DiscreteMeasure& x, const Kernel& k, const TestFn& f,
                           std::uint64_t n);

/// <f, Q(mu, nu, tau)> with mu(dw1) nu(dw2) tau(dw3).
double trilinear_pairing(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const DiscreteMeasure& tau, const Kernel& k, const TestFn& f);

/// Closed form of <p, Q(mu)> for the Product kernel and a polynomial test
/// function p(w) = sum_k c_k w^k of degree <= 3, valid when every triple of
/// atoms lies in D (for instance max atom <= 2 * min atom). Uses the three
/// moments m_k = sum w_i a_i omega_i^k with a_i = omega_i^(lambda/3).
double q_pairing_product_poly(const DiscreteMeasure& mu, double lambda,
                              std::span<const double> coeffs);

/// (mu^B, lambda^B): a measure supported on B = [0, bound] plus a nonnegative
/// overflow scalar carrying the phi-mass that left B.
struct TruncatedState {
  DiscreteMeasure inner;
  double overflow = 0.0;
  double bound = 0.0;
};

struct LbPairing {
  double measure_part = 0.0;   // <f, measure component of L^B>
  double overflow_part = 0.0;  // a * (scalar component of L^B)
  double total() const noexcept { return measure_part + overflow_part; }
};

/// <(f, a), L^B(mu, lambda)> with phi(w) = w + 1, split into the pairing of
/// the measure component with f and the overflow component times a.
LbPairing l_b_pairing(const TruncatedState& state, const Kernel& k, const TestFn& f, double a);

enum class Truncation {
  Overflow,      // outputs leaving the grid are credited to the overflow scalar (L^B)
  Conservative,  // triples whose output leaves the grid are dropped entirely
};

/// Dense-grid collision operator on cells [0, cells) with positions c * h.
/// Precomputes the per-cell third factors and the per-pair kernel slices so
/// repeated evaluations (time stepping) only run the scatter loops.
class CollisionGrid {
 public:
  CollisionGrid(Kernel k, double h, std::size_t cells);

  struct Result {
    std::vector<double> gain;  // length out_len
    std::vector<double> loss;  // length cells
    double overflow_mass = 0.0;
    double overflow_phi = 0.0;
  };

  /// Ordered-triple scatter of 1/2 K u1 u2 u3: +c at the output and the
  /// catalyst cell, -c at both input cells. Outputs at cells >= out_len are
  /// handled according to `mode`. out_len must be in [cells, 2 * cells - 1].
  void scatter(std::span<const double> u, std::size_t out_len, Truncation mode, Result& out,
               const simd::KernelTable& table = simd::kernels()) const;

  /// Per-cell collision loss rate rho_c = sum_{(c, j, l) in D} K u_j u_l, so
  /// that loss[c] == rho_c * u[c].
  std::vector<double> loss_rate(std::span<const double> u, std::size_t out_len,
                                Truncation mode) const;

  /// sup over grid triples in D of 1/2 K * (3 + (output in B ? 1 : phi(output))):
  /// the collision part of the operator-norm constant of L^B on this grid.
  double collision_norm_constant() const;

  const Kernel& kernel() const noexcept { return kernel_; }
  double h() const noexcept { return h_; }
  std::size_t cells() const noexcept { return cells_; }

 private:
  Kernel kernel_;
  double h_;
  std::size_t cells_;
  std::vector<double> third_;
  std::vector<KernelSlice> slices_;  // cells x cells, row-major
};

}  // namespace wavekin
