// Deterministic solvers for the truncated system
//   d/dt (mu, lambda) = L^B(mu, lambda),  phi(w) = w + 1,
// on the grid h * {0, .., M - 1} with B = [0, (M - 1) h]. In grid form, with
// r = lambda^2 + 2 lambda <phi, mu>,
//   du_c/dt  = gain_c - loss_c - r phi_c u_c
//   dlambda/dt = (phi-mass of collision outputs beyond B) + r <phi^2, mu>
// so <phi, mu> + lambda is conserved by every linear multistage scheme.
#pragma once

#include <limits>
#include <string>
#include <vector>

#include "wavekin/collision.hpp"
#include "wavekin/kernels.hpp"
#include "wavekin/measures.hpp"
#include "wavekin/particle.hpp"

namespace wavekin {

enum class Method { ExplicitEuler, RK4, IntegratingFactorEuler };

Method parse_method(const std::string& name);  // "euler" | "rk4" | "if-euler"
std::string method_name(Method m);

struct SolverConfig {
  Method method = Method::RK4;
  double dt = 0.0;  // 0 selects default_dt
  double t_end = 1.0;
  double h = 1.0 / 64.0;
  double bound = 4.0;  // B = [0, bound]; must be a multiple of h
  Truncation truncation = Truncation::Overflow;
  std::vector<double> sample_times;  // empty means {0, t_end}
  bool snapshots = true;
  std::size_t max_steps = 50'000'000;
};

struct SolveResult {
  double h = 0.0;
  std::size_t cells = 0;
  double dt = 0.0;  // largest step actually taken
  std::size_t steps = 0;
  std::vector<MomentSample> samples;
  std::vector<double> times;
  std::vector<DiscreteMeasure> snapshots;
  std::vector<double> final_u;
  double final_lambda = 0.0;
  /// max over steps of |(<phi, mu> + lambda) - initial| / initial
  double conservation_residual = 0.0;
};

/// dt = 0.05 / (<phi, mu0> + lambda0)^2 * S with S = 1 / <phi^2, mu0>.
double default_dt(const DiscreteMeasure& mu0, double lambda0);

/// Time-marches (mu, lambda) from (mu0, lambda0); mu0 must sit on the grid
/// inside B. Throws std::runtime_error on a negative weight below -1e-9
/// (Euler, RK4).
SolveResult solve_truncated(const DiscreteMeasure& mu0, double lambda0, const Kernel& k,
                            const SolverConfig& cfg);

struct RichardsonReport {
  std::vector<double> dts;
  std::vector<double> diffs;   // ||u_dt - u_{dt/2}||_TV at t_end, one per consecutive pair
  std::vector<double> ratios;  // diffs[i] / diffs[i + 1]
  double observed_order = 0.0; // log2 of the last ratio
};

/// Runs the solve at dt, dt/2, ..., dt/2^(levels-1).
RichardsonReport richardson(const DiscreteMeasure& mu0, double lambda0, const Kernel& k,
                            const SolverConfig& cfg, std::size_t levels = 4);

struct PicardReport {
  double C = 0.0;  // operator-norm constant for the norm ||mu||_TV + |lambda|
  double T = 0.0;  // 1 / (4C)
  std::vector<double> times;
  std::vector<std::vector<double>> f;  // f[n][m] = ||(mu^n, lambda^n)(t_m)||
  std::vector<double> f_sup;           // sup_m f[n][m]
  std::vector<double> g_sup;           // g_sup[n] = sup_m ||iterate n - iterate n-1||; g_sup[0] = 0
  double bound = 0.0;                  // sqrt(2)
  bool within_bound = true;
  bool geometric = true;  // g_{n+1} < g_n for n >= 2 until the rounding floor
  std::size_t first_violation = 0;
};

/// Picard iterates with left-endpoint quadrature on [0, T], T = 1/(4C).
PicardReport picard(const DiscreteMeasure& mu0, double lambda0, const Kernel& k, double h,
                    double bound, std::size_t iterations, std::size_t steps = 64);

/// C = sup over grid triples in D of 1/2 K (3 + (out in B ? 1 : phi(out)))
///   + phimax^2 (1 + phimax),  phimax = 1 + bound.
double picard_constant(const Kernel& k, double h, double bound);

struct LimitResult {
  std::vector<double> bounds;
  std::vector<SolveResult> runs;
  double max_monotonicity_violation = 0.0;  // max over t, cells of (u^B - u^B')_+
  double max_conservation_spread = 0.0;     // max relative spread of <phi,mu>+lambda across B
};

/// Solves for each B in the increasing schedule with lambda^B_0 = <phi 1_{B^c}, mu0>
/// and checks monotonicity in B (1e-9) and the shared conserved value (1e-10).
/// Throws std::logic_error on a violation.
LimitResult solve_limit(const DiscreteMeasure& mu0, const Kernel& k, const SolverConfig& cfg,
                        const std::vector<double>& schedule);

/// zeta(mu0) = 1 / (<phi^2, mu0> <phi, mu0>)
double zeta(const DiscreteMeasure& mu0);
/// (S - <phi, mu0> t)^-1 with S = 1 / <phi^2, mu0>; requires t < zeta(mu0).
double phi2_bound(const DiscreteMeasure& mu0, double t);

}  // namespace wavekin
