#include "wavekin/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "solver_internal.hpp"

namespace wavekin {

Method parse_method(const std::string& name) {
  if (name == "euler") return Method::ExplicitEuler;
  if (name == "rk4") return Method::RK4;
  if (name == "if-euler") return Method::IntegratingFactorEuler;
  throw std::invalid_argument("unknown method '" + name + "' (expected euler, rk4, if-euler)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::ExplicitEuler: return "euler";
    case Method::RK4: return "rk4";
    case Method::IntegratingFactorEuler: return "if-euler";
  }
  return "rk4";
}

namespace detail {

std::size_t grid_cells(double h, double bound) {
  if (!(h > 0.0)) throw std::invalid_argument("h must be > 0");
  if (!(bound >= 0.0) || !std::isfinite(bound)) throw std::invalid_argument("bound must be finite and >= 0");
  const double q = bound / h;
  const double r = std::round(q);
  if (std::abs(q - r) > 1e-9 * std::max(1.0, q)) {
    throw std::invalid_argument("bound " + format_double(bound) + " is not a multiple of h = " +
                                format_double(h));
  }
  return static_cast<std::size_t>(r) + 1;
}

std::vector<double> to_grid(const DiscreteMeasure& mu, double h, std::size_t cells,
                            double* outside_phi) {
  std::vector<double> u(cells, 0.0);
  CompensatedSum out;
  for (const auto& a : mu.atoms()) {
    const double q = a.omega / h;
    const double c = std::round(q);
    if (std::abs(q - c) > 1e-9 * std::max(1.0, q)) {
      throw std::invalid_argument("atom at " + format_double(a.omega) +
                                  " is not on the grid h = " + format_double(h));
    }
    const auto ci = static_cast<std::size_t>(c);
    if (ci < cells) {
      u[ci] += a.weight;
    } else if (outside_phi) {
      out.add((1.0 + a.omega) * a.weight);
    } else {
      throw std::invalid_argument("atom at " + format_double(a.omega) + " lies outside B");
    }
  }
  if (outside_phi) *outside_phi = out.value();
  return u;
}

System::System(const Kernel& k, double h, std::size_t cells, Truncation mode)
    : grid(k, h, cells), mode(mode), phi(cells) {
  for (std::size_t c = 0; c < cells; ++c) phi[c] = 1.0 + static_cast<double>(c) * h;
}

void System::rhs(const std::vector<double>& u, double lam, std::vector<double>& du, double& dlam) {
  const std::size_t m = grid.cells();
  grid.scatter(u, m, mode, res);
  CompensatedSum pm, p2m;
  for (std::size_t c = 0; c < m; ++c) {
    pm.add(phi[c] * u[c]);
    p2m.add(phi[c] * phi[c] * u[c]);
  }
  const double r = lam * lam + 2.0 * lam * pm.value();
  du.resize(m);
  for (std::size_t c = 0; c < m; ++c) du[c] = res.gain[c] - res.loss[c] - r * phi[c] * u[c];
  dlam = res.overflow_phi + r * p2m.value();
}

double System::conserved(const std::vector<double>& u, double lam) const {
  CompensatedSum s;
  for (std::size_t c = 0; c < u.size(); ++c) s.add(phi[c] * u[c]);
  s.add(lam);
  return s.value();
}

MomentSample System::sample(double t, const std::vector<double>& u, double lam) const {
  CompensatedSum W, E, P, P2;
  for (std::size_t c = 0; c < u.size(); ++c) {
    W.add(u[c]);
    E.add((phi[c] - 1.0) * u[c]);
    P.add(phi[c] * u[c]);
    P2.add(phi[c] * phi[c] * u[c]);
  }
  MomentSample s;
  s.t = t;
  s.W = W.value();
  s.E = E.value();
  s.phi = P.value();
  s.phi2 = P2.value();
  s.Lambda = lam;
  return s;
}

}  // namespace detail

double default_dt(const DiscreteMeasure& mu0, double lambda0) {
  const auto m = moments(mu0);
  if (!(m.phi > 0.0) || !(m.phi2 > 0.0)) throw std::invalid_argument("default_dt: mu0 has no mass");
  const double p = m.phi + lambda0;
  return 0.05 / (p * p) / m.phi2;
}

namespace {

void check_nonnegative(const std::vector<double>& u, double h, double t, Method m) {
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (u[c] < -1e-9) {
      throw std::runtime_error("negative weight " + format_double(u[c]) + " at w = " +
                               format_double(static_cast<double>(c) * h) + ", t = " +
                               format_double(t) + " under " + method_name(m) +
                               ": dt too large (try if-euler)");
    }
  }
}

}  // namespace

SolveResult solve_truncated(const DiscreteMeasure& mu0, double lambda0, const Kernel& k,
                            const SolverConfig& cfg) {
  if (!(lambda0 >= 0.0)) throw std::invalid_argument("lambda0 must be >= 0");
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) throw std::invalid_argument("t_end must be >= 0");
  if (cfg.dt < 0.0) throw std::invalid_argument("dt must be > 0");
  const std::size_t m = detail::grid_cells(cfg.h, cfg.bound);
  std::vector<double> u = detail::to_grid(mu0, cfg.h, m, nullptr);
  double lam = lambda0;
  const double dt_req = cfg.dt > 0.0 ? cfg.dt : default_dt(mu0, lambda0);

  std::vector<double> times = cfg.sample_times;
  if (times.empty()) times = {0.0, cfg.t_end};
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0 || times[i] > cfg.t_end || (i > 0 && times[i] <= times[i - 1])) {
      throw std::invalid_argument("sample times must increase within [0, t_end]");
    }
  }

  detail::System sys(k, cfg.h, m, cfg.truncation);
  SolveResult out;
  out.h = cfg.h;
  out.cells = m;
  const double c0 = sys.conserved(u, lam);
  auto record = [&](double t) {
    out.samples.push_back(sys.sample(t, u, lam));
    out.times.push_back(t);
    if (cfg.snapshots) out.snapshots.push_back(DiscreteMeasure::from_dense(u, cfg.h));
  };

  std::vector<double> k1, k2, k3, k4, tmp;
  double l1, l2, l3, l4;
  double t = 0.0;
  for (double target : times) {
    const double span = target - t;
    if (span > 0.0) {
      const auto nsteps = static_cast<std::size_t>(std::ceil(span / dt_req - 1e-12));
      const double dt = span / static_cast<double>(nsteps);
      out.dt = std::max(out.dt, dt);
      for (std::size_t s = 0; s < nsteps; ++s) {
        if (++out.steps > cfg.max_steps) throw std::runtime_error("solver: max_steps exceeded");
        switch (cfg.method) {
          case Method::ExplicitEuler:
            sys.rhs(u, lam, k1, l1);
            for (std::size_t c = 0; c < m; ++c) u[c] += dt * k1[c];
            lam += dt * l1;
            break;
          case Method::RK4: {
            sys.rhs(u, lam, k1, l1);
            tmp.resize(m);
            for (std::size_t c = 0; c < m; ++c) tmp[c] = u[c] + 0.5 * dt * k1[c];
            sys.rhs(tmp, lam + 0.5 * dt * l1, k2, l2);
            for (std::size_t c = 0; c < m; ++c) tmp[c] = u[c] + 0.5 * dt * k2[c];
            sys.rhs(tmp, lam + 0.5 * dt * l2, k3, l3);
            for (std::size_t c = 0; c < m; ++c) tmp[c] = u[c] + dt * k3[c];
            sys.rhs(tmp, lam + dt * l3, k4, l4);
            for (std::size_t c = 0; c < m; ++c) {
              u[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            lam += dt / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
            break;
          }
          case Method::IntegratingFactorEuler: {
            // frozen-coefficient integrating factor over one step
            const auto rho = sys.grid.loss_rate(u, m, cfg.truncation);
            sys.grid.scatter(u, m, cfg.truncation, sys.res);
            CompensatedSum pm, p2m;
            for (std::size_t c = 0; c < m; ++c) {
              pm.add(sys.phi[c] * u[c]);
              p2m.add(sys.phi[c] * sys.phi[c] * u[c]);
            }
            const double r = lam * lam + 2.0 * lam * pm.value();
            const double dlam = sys.res.overflow_phi + r * p2m.value();
            for (std::size_t c = 0; c < m; ++c) {
              const double total_rate = rho[c] + r * sys.phi[c];
              u[c] = std::exp(-total_rate * dt) * (u[c] + dt * sys.res.gain[c]);
            }
            lam += dt * dlam;
            break;
          }
        }
        t += dt;
        if (cfg.method != Method::IntegratingFactorEuler) check_nonnegative(u, cfg.h, t, cfg.method);
        const double drift = std::abs(sys.conserved(u, lam) - c0) / c0;
        out.conservation_residual = std::max(out.conservation_residual, drift);
      }
    }
    t = target;
    record(target);
  }
  out.final_u = u;
  out.final_lambda = lam;
  return out;
}

RichardsonReport richardson(const DiscreteMeasure& mu0, double lambda0, const Kernel& k,
                            const SolverConfig& cfg, std::size_t levels) {
  if (levels < 2) throw std::invalid_argument("richardson: need at least two levels");
  RichardsonReport rep;
  SolverConfig c = cfg;
  c.dt = cfg.dt > 0.0 ? cfg.dt : default_dt(mu0, lambda0);
  c.sample_times = {0.0, cfg.t_end};
  c.snapshots = false;
  std::vector<std::vector<double>> finals;
  for (std::size_t i = 0; i < levels; ++i) {
    rep.dts.push_back(c.dt);
    finals.push_back(solve_truncated(mu0, lambda0, k, c).final_u);
    c.dt *= 0.5;
  }
  for (std::size_t i = 0; i + 1 < levels; ++i) {
    CompensatedSum d;
    for (std::size_t j = 0; j < finals[i].size(); ++j) d.add(std::abs(finals[i][j] - finals[i + 1][j]));
    rep.diffs.push_back(d.value());
  }
  for (std::size_t i = 0; i + 1 < rep.diffs.size(); ++i) rep.ratios.push_back(rep.diffs[i] / rep.diffs[i + 1]);
  if (!rep.ratios.empty()) rep.observed_order = std::log2(rep.ratios.back());
  return rep;
}

LimitResult solve_limit(const DiscreteMeasure& mu0, const Kernel& k, const SolverConfig& cfg,
                        const std::vector<double>& schedule) {
  if (schedule.empty()) throw std::invalid_argument("solve_limit: empty bound schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (!(schedule[i] > schedule[i - 1])) throw std::invalid_argument("solve_limit: schedule must increase");
  }
  LimitResult res;
  res.bounds = schedule;
  SolverConfig c = cfg;
  if (c.dt <= 0.0) c.dt = default_dt(mu0, 0.0);
  for (double b : schedule) {
    c.bound = b;
    const std::size_t m = detail::grid_cells(c.h, b);
    double outside = 0.0;
    const auto u0 = detail::to_grid(mu0, c.h, m, &outside);
    const auto inner = DiscreteMeasure::from_dense(u0, c.h);
    res.runs.push_back(solve_truncated(inner, std::max(outside, 0.0), k, c));
  }
  for (std::size_t i = 0; i + 1 < res.runs.size(); ++i) {
    const auto& a = res.runs[i];
    const auto& b = res.runs[i + 1];
    for (std::size_t s = 0; s < a.samples.size(); ++s) {
      const double ca = a.samples[s].phi + *a.samples[s].Lambda;
      const double cb = b.samples[s].phi + *b.samples[s].Lambda;
      res.max_conservation_spread = std::max(res.max_conservation_spread, std::abs(ca - cb) / std::abs(cb));
      if (cfg.snapshots) {
        const auto ua = a.snapshots[s].to_dense(a.cells);
        const auto ub = b.snapshots[s].to_dense(b.cells);
        for (std::size_t cell = 0; cell < a.cells; ++cell) {
          res.max_monotonicity_violation = std::max(res.max_monotonicity_violation, ua[cell] - ub[cell]);
        }
      }
    }
    if (!cfg.snapshots) {
      for (std::size_t cell = 0; cell < a.cells; ++cell) {
        res.max_monotonicity_violation =
            std::max(res.max_monotonicity_violation, a.final_u[cell] - b.final_u[cell]);
      }
    }
  }
  if (res.max_monotonicity_violation > 1e-9) {
    throw std::logic_error("solve_limit: mu^B <= mu^B' violated by " +
                           format_double(res.max_monotonicity_violation));
  }
  if (res.max_conservation_spread > 1e-10) {
    throw std::logic_error("solve_limit: <phi,mu^B> + lambda^B differs across B by " +
                           format_double(res.max_conservation_spread));
  }
  return res;
}

double zeta(const DiscreteMeasure& mu0) {
  const auto m = moments(mu0);
  if (!(m.phi > 0.0) || !(m.phi2 > 0.0)) throw std::invalid_argument("zeta: measure has no mass");
  return 1.0 / (m.phi2 * m.phi);
}

double phi2_bound(const DiscreteMeasure& mu0, double t) {
  const double z = zeta(mu0);
  if (t < 0.0) throw std::invalid_argument("phi2_bound: t must be >= 0");
  if (t >= z) {
    throw std::domain_error("phi2_bound: t = " + format_double(t) + " is past zeta(mu0) = " +
                            format_double(z));
  }
  const auto m = moments(mu0);
  return 1.0 / (1.0 / m.phi2 - m.phi * t);
}

}  // namespace wavekin
