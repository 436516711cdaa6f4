#include <cmath>
#include <limits>
#include <stdexcept>

#include "solver_internal.hpp"

namespace wavekin {

// The bound ||L^B(mu, lambda)|| <= C ||(mu, lambda)||^3 in the norm
// ||mu||_TV + |lambda|. Each scattered triple moves 1/2 K |u1 u2 u3| of mass
// out of two cells and into two: at most 4 units of TV, or 3 plus phi(out)
// when the output is credited to lambda. The killing term
// r = lambda^2 + 2 lambda <phi, mu> costs r (phimax + phimax^2) ||mu||, and
// lambda^2 m + 2 phimax lambda m^2 <= phimax (lambda + m)^3.
double picard_constant(const Kernel& k, double h, double bound) {
  const std::size_t m = detail::grid_cells(h, bound);
  const CollisionGrid grid(k, h, m);
  const double phimax = 1.0 + bound;
  return grid.collision_norm_constant() + phimax * phimax * (1.0 + phimax);
}

PicardReport picard(const DiscreteMeasure& mu0, double lambda0, const Kernel& k, double h,
                    double bound, std::size_t iterations, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("picard: steps must be positive");
  if (!(lambda0 >= 0.0)) throw std::invalid_argument("picard: lambda0 must be >= 0");
  const std::size_t m = detail::grid_cells(h, bound);
  const auto u0 = detail::to_grid(mu0, h, m, nullptr);
  detail::System sys(k, h, m, Truncation::Overflow);
  if (sys.conserved(u0, lambda0) > 1.0 + 1e-12) {
    throw std::invalid_argument("picard: rescale so that <phi, mu0> + lambda0 <= 1");
  }

  PicardReport rep;
  rep.C = picard_constant(k, h, bound);
  rep.T = 1.0 / (4.0 * rep.C);
  rep.bound = std::sqrt(2.0);
  const double tau = rep.T / static_cast<double>(steps);
  for (std::size_t q = 0; q <= steps; ++q) rep.times.push_back(tau * static_cast<double>(q));

  auto norm = [](const std::vector<double>& u, double lam) {
    CompensatedSum s;
    for (double x : u) s.add(std::abs(x));
    s.add(std::abs(lam));
    return s.value();
  };

  std::vector<std::vector<double>> U(steps + 1, u0);
  std::vector<double> L(steps + 1, lambda0);
  auto record = [&](std::size_t n) {
    std::vector<double> f(steps + 1);
    double sup = 0.0;
    for (std::size_t q = 0; q <= steps; ++q) {
      f[q] = norm(U[q], L[q]);
      sup = std::max(sup, f[q]);
    }
    rep.f.push_back(std::move(f));
    rep.f_sup.push_back(sup);
    if (sup > rep.bound + 1e-9 && rep.within_bound) {
      rep.within_bound = false;
      rep.first_violation = n;
    }
  };
  record(0);
  rep.g_sup.push_back(0.0);

  std::vector<double> du;
  double dl = 0.0;
  for (std::size_t n = 1; n <= iterations; ++n) {
    std::vector<std::vector<double>> V(steps + 1);
    std::vector<double> M(steps + 1);
    V[0] = u0;
    M[0] = lambda0;
    for (std::size_t q = 0; q < steps; ++q) {
      sys.rhs(U[q], L[q], du, dl);
      V[q + 1] = V[q];
      for (std::size_t c = 0; c < m; ++c) V[q + 1][c] += tau * du[c];
      M[q + 1] = M[q] + tau * dl;
    }
    double g = 0.0;
    for (std::size_t q = 0; q <= steps; ++q) {
      CompensatedSum s;
      for (std::size_t c = 0; c < m; ++c) s.add(std::abs(V[q][c] - U[q][c]));
      s.add(std::abs(M[q] - L[q]));
      g = std::max(g, s.value());
    }
    U = std::move(V);
    L = std::move(M);
    record(n);
    rep.g_sup.push_back(g);
  }

  // successive differences must shrink until they reach rounding level
  for (std::size_t n = 2; n + 1 < rep.g_sup.size(); ++n) {
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * rep.f_sup[n];
    if (rep.g_sup[n] <= floor) break;
    if (!(rep.g_sup[n + 1] < rep.g_sup[n])) {
      rep.geometric = false;
      break;
    }
  }
  return rep;
}

}  // namespace wavekin
