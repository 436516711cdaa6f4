#include "wavekin/collision.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace wavekin {

double q_pairing(const DiscreteMeasure& mu, const Kernel& k, const TestFn& f) {
  return trilinear_pairing(mu, mu, mu, k, f);
}

double trilinear_pairing(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const DiscreteMeasure& tau, const Kernel& k, const TestFn& f) {
  // f at the input atoms is reused across the m^3 loop
  std::vector<double> f_mu, f_nu, f_tau;
  for (const auto& a : mu.atoms()) f_mu.push_back(f(a.omega));
  for (const auto& a : nu.atoms()) f_nu.push_back(f(a.omega));
  for (const auto& a : tau.atoms()) f_tau.push_back(f(a.omega));

  CompensatedSum total;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto& a1 = mu.atoms()[i];
    for (std::size_t j = 0; j < nu.size(); ++j) {
      const auto& a2 = nu.atoms()[j];
      const double w12 = a1.weight * a2.weight;
      const double s = a1.omega + a2.omega;
      for (std::size_t l = 0; l < tau.size(); ++l) {
        const auto& a3 = tau.atoms()[l];
        if (!(s >= a3.omega)) continue;
        const double bracket = f(s - a3.omega) + f_tau[l] - f_mu[i] - f_nu[j];
        total.add(0.5 * k(a1.omega, a2.omega, a3.omega) * w12 * a3.weight * bracket);
      }
    }
  }
  return total.value();
}

DiscreteMeasure q_measure(const DiscreteMeasure& mu, const Kernel& k) {
  if (!mu.is_grid()) {
    throw std::invalid_argument("q_measure: input must be a grid measure (closure of w1 + w2 - w3)");
  }
  const double h = *mu.resolution();
  std::vector<std::uint64_t> cells(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) cells[i] = mu.cell(i);

  std::map<std::uint64_t, CompensatedSum> acc;
  const auto& at = mu.atoms();
  for (std::size_t i = 0; i < at.size(); ++i) {
    for (std::size_t j = 0; j < at.size(); ++j) {
      const std::uint64_t s = cells[i] + cells[j];
      for (std::size_t l = 0; l < at.size(); ++l) {
        if (cells[l] > s) continue;
        const double c =
            0.5 * k(at[i].omega, at[j].omega, at[l].omega) * at[i].weight * at[j].weight * at[l].weight;
        acc[s - cells[l]].add(c);
        acc[cells[l]].add(c);
        acc[cells[i]].add(-c);
        acc[cells[j]].add(-c);
      }
    }
  }
  std::vector<Atom> atoms;
  for (const auto& [cell, sum] : acc) {
    const double w = sum.value();
    if (w != 0.0) atoms.push_back({static_cast<double>(cell) * h, w});
  }
  return DiscreteMeasure(std::move(atoms), h);
}

namespace {

void check_empirical(const DiscreteMeasure& x, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("q_counting: n must be positive");
  const double nd = static_cast<double>(n);
  double count = 0.0;
  for (const auto& a : x.atoms()) {
    const double m = a.weight * nd;
    if (std::abs(m - std::round(m)) > 1e-9 * std::max(1.0, m) || std::round(m) < 1.0) {
      throw std::invalid_argument("q_counting: atom weight " + format_double(a.weight) +
                                  " is not a positive multiple of 1/n");
    }
    count += std::round(m);
  }
  if (count != nd) {
    throw std::invalid_argument("q_counting: measure holds " + format_double(count) +
                                " particles but n = " + std::to_string(n));
  }
}

}  // namespace

double q_counting_diagonal(const DiscreteMeasure& x, const Kernel& k, const TestFn& f,
                           std::uint64_t n) {
  CompensatedSum diag;
  for (const auto& a : x.atoms()) {
    const double fa = f(a.omega);
    for (const auto& c : x.atoms()) {
      if (!(2.0 * a.omega >= c.omega)) continue;
      const double bracket = f(2.0 * a.omega - c.omega) + f(c.omega) - 2.0 * fa;
      diag.add(0.5 * k(a.omega, a.omega, c.omega) * a.weight * c.weight * bracket);
    }
  }
  return diag.value() / static_cast<double>(n);
}

double q_counting(const DiscreteMeasure& x, const Kernel& k, const TestFn& f, std::uint64_t n) {
  check_empirical(x, n);
  return q_pairing(x, k, f) - q_counting_diagonal(x, k, f, n);
}

double q_pairing_product_poly(const DiscreteMeasure& mu, double lambda,
                              std::span<const double> coeffs) {
  if (coeffs.size() > 4) throw std::invalid_argument("q_pairing_product_poly: degree must be <= 3");
  CompensatedSum m0s, m1s, m2s;
  const double e = lambda / 3.0;
  for (const auto& a : mu.atoms()) {
    const double wa = a.weight * std::pow(a.omega, e);
    m0s.add(wa);
    m1s.add(wa * a.omega);
    m2s.add(wa * a.omega * a.omega);
  }
  const double m0 = m0s.value(), m1 = m1s.value(), m2 = m2s.value();
  // constant and linear parts of the bracket vanish identically
  const double c2 = coeffs.size() > 2 ? coeffs[2] : 0.0;
  const double c3 = coeffs.size() > 3 ? coeffs[3] : 0.0;
  const double gap = m0 * m2 - m1 * m1;
  return c2 * m0 * gap + c3 * 3.0 * m1 * gap;
}

LbPairing l_b_pairing(const TruncatedState& state, const Kernel& k, const TestFn& f, double a) {
  const auto& at = state.inner.atoms();
  const double bound = state.bound;
  for (const auto& x : at) {
    if (x.omega > bound) throw std::invalid_argument("l_b_pairing: atom outside B");
  }
  const auto phi = [](double w) { return w + 1.0; };
  CompensatedSum inner, outer, phi_mu, fphi_mu, phi2_mu;
  for (const auto& x : at) {
    phi_mu.add(phi(x.omega) * x.weight);
    fphi_mu.add(f(x.omega) * phi(x.omega) * x.weight);
    phi2_mu.add(phi(x.omega) * phi(x.omega) * x.weight);
  }
  for (const auto& x1 : at) {
    const double f1 = f(x1.omega);
    for (const auto& x2 : at) {
      const double s = x1.omega + x2.omega;
      const double f2 = f(x2.omega);
      for (const auto& x3 : at) {
        if (!(s >= x3.omega)) continue;
        const double out = s - x3.omega;
        const double c = 0.5 * k(x1.omega, x2.omega, x3.omega) * x1.weight * x2.weight * x3.weight;
        const double f_out = out <= bound ? f(out) : 0.0;
        inner.add(c * (f_out + f(x3.omega) - f1 - f2));
        if (out > bound) outer.add(c * phi(out));
      }
    }
  }
  const double lam = state.overflow;
  const double rate = lam * lam + 2.0 * lam * phi_mu.value();
  LbPairing r;
  r.measure_part = inner.value() - rate * fphi_mu.value();
  r.overflow_part = a * (outer.value() + rate * phi2_mu.value());
  return r;
}

}  // namespace wavekin
