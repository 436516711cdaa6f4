// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "wavekin/analysis.hpp"
#include "wavekin/collision.hpp"
#include "wavekin/initial.hpp"
#include "wavekin/parallel.hpp"
#include "wavekin/particle.hpp"
#include "wavekin/solver.hpp"

using namespace wavekin;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (limit_s > 0 && secs > limit_s) {
    o.pass = false;
    o.detail += "; over the " + std::to_string(int(limit_s)) + " s budget";
  }
  if (!o.pass) ++failures;
  std::printf("%s  criterion %2d  %-34s %8.2f s  %s\n", o.pass ? "PASS" : "FAIL", id, name, secs,
              o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

DiscreteMeasure random_measure(Rng& rng, std::size_t atoms, double hi, bool signed_w) {
  std::vector<Atom> a;
  for (std::size_t i = 0; i < atoms; ++i) {
    double w = 0.05 + rng.uniform();
    if (signed_w && rng.uniform() < 0.5) w = -w;
    a.push_back({hi * rng.uniform(), w});
  }
  return DiscreteMeasure(a);
}

// sum over D of 1/2 K |a||b||c|: scale of any pairing with |f| <= 1
double abs_scale(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const DiscreteMeasure& tau,
                 const Kernel& k) {
  double s = 0;
  for (const auto& a : mu.atoms())
    for (const auto& b : nu.atoms())
      for (const auto& c : tau.atoms())
        if (in_domain(a.omega, b.omega, c.omega))
          s += 0.5 * k(a.omega, b.omega, c.omega) * std::abs(a.weight * b.weight * c.weight);
  return s;
}

// ---------------------------------------------------------------- 1
Outcome conservation() {
  const double h = std::ldexp(1.0, -20);
  Rng rng(1, 0);
  auto st = init_exponential(1000, 1.0, h, rng);
  SimOptions opt;
  opt.t_end = 1.0;
  for (int i = 0; i <= 10; ++i) opt.sample_times.push_back(i / 10.0);
  const auto tr = simulate(st, Kernel::product(1), WeightFunction::affine(), opt, rng);
  const auto& s0 = tr.samples.front();
  bool ok = tr.accepted > 0;
  for (const auto& s : tr.samples) ok = ok && s.alive == s0.alive && s.cell_sum == s0.cell_sum;
  ok = ok && st.cell_sum() == s0.cell_sum;
  return {ok, "jumps=" + std::to_string(tr.accepted) + " W drift=" +
                  std::to_string(std::int64_t(tr.samples.back().alive) - std::int64_t(s0.alive)) +
                  " E drift (cells)=" +
                  std::to_string(std::int64_t(tr.samples.back().cell_sum) - std::int64_t(s0.cell_sum))};
}

// ---------------------------------------------------------------- 2
Outcome identities() {
  Rng rng(2, 0);
  const std::vector<Kernel> ks{Kernel::product(1), Kernel::sum(2), Kernel::mixed(1, 0.5, 0.5),
                               Kernel::constant(1)};
  double worst_cons = 0, worst_tri = 0;
  const TestFn one = [](double) { return 1.0; };
  const TestFn id = [](double w) { return w; };
  const TestFn g = [](double w) { return std::cos(1.3 * w); };
  for (int trial = 0; trial < 100; ++trial) {
    const auto& k = ks[trial % ks.size()];
    const auto mu = random_measure(rng, 1 + rng.below(30), 5.0, trial % 2 == 1);
    const auto nu = random_measure(rng, 1 + rng.below(30), 5.0, false);
    const double s = abs_scale(mu, mu, mu, k);
    double wmax = 0;
    for (const auto& a : mu.atoms()) wmax = std::max(wmax, a.omega);
    worst_cons = std::max(worst_cons, std::abs(q_pairing(mu, k, one)) / (4 * s));
    worst_cons = std::max(worst_cons, std::abs(q_pairing(mu, k, id)) / (4 * s * 2 * wmax));

    const double lhs = q_pairing(mu, k, g) - q_pairing(nu, k, g);
    const double rhs = trilinear_pairing(mu + nu, mu - nu, mu, k, g) +
                       trilinear_pairing(mu + nu, nu, mu - nu, k, g) +
                       trilinear_pairing(mu, nu, nu - mu, k, g);
    const auto sum = mu + nu;
    const double scale = 4 * abs_scale(sum, sum, sum, k);
    worst_tri = std::max(worst_tri, std::abs(lhs - rhs) / scale);
  }
  return {worst_cons <= 1e-12 && worst_tri <= 1e-10,
          fmt("max rel |<1,Q>|,|<w,Q>| = %.2e", worst_cons) + fmt(", trilinear residual = %.2e", worst_tri)};
}

// ---------------------------------------------------------------- 3
Outcome counting() {
  const double h = 1.0 / 16;
  const auto k = Kernel::product(1);
  const TestFn f = [](double w) { return 1.0 / (1.0 + w); };
  std::vector<double> xs, ys;
  bool below = true;
  std::string d;
  for (std::uint64_t n : {100u, 1000u, 10000u}) {
    Rng rng(3, n);
    const auto x = init_exponential(n, 1.0, h, rng).empirical();
    const double diff = std::abs(q_counting(x, k, f, n) - q_pairing(x, k, f));
    const double lam = k(x.max_cell() * h, x.max_cell() * h, x.max_cell() * h);
    const double bound = 2.0 / double(n) * 1.0 * lam;
    below = below && diff <= bound;
    xs.push_back(std::log(double(n)));
    ys.push_back(std::log(diff));
    d += fmt("%.3e", diff) + (n < 10000 ? "," : "");
  }
  const double slope = ols(xs, ys).slope;
  return {below && slope >= -1.1 && slope <= -0.9,
          "diffs=" + d + fmt(" slope=%.3f", slope) + (below ? " within 2|f|L/n" : " ABOVE bound")};
}

// ---------------------------------------------------------------- 4
double smooth_indicator(double w) {
  // 1 on [0, 1.75], 0 beyond 2.25, cosine ramp between
  if (w <= 1.75) return 1.0;
  if (w >= 2.25) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (w - 1.75) / 0.5));
}

Outcome martingale() {
  const auto k = Kernel::product(1);
  const double h = 0.25;
  const std::function<double(double)> f = smooth_indicator;
  std::map<std::size_t, std::vector<double>> sup;
  std::map<std::size_t, double> lam;
  for (std::size_t n : {100u, 400u, 1600u}) {
    const std::size_t reps = 200;
    std::vector<double> s(reps), kmax(reps);
    parallel_for(reps, 0, [&](std::size_t r) {
      Rng rng(4000 + n, r);
      auto st = init_exponential(n, 1.0, h, rng);
      SimOptions opt;
      opt.t_end = 1.0;
      opt.record_events = true;
      const auto tr = simulate(st, k, WeightFunction::affine(), opt, rng);
      s[r] = martingale_sup_sq(tr, f, k);
      // sup of K over the frequencies this path visited
      std::uint64_t top = *std::max_element(tr.initial_cells.begin(), tr.initial_cells.end());
      for (const auto& e : tr.events) top = std::max(top, e.out);
      kmax[r] = k(top * h, top * h, top * h);
    });
    sup[n] = s;
    lam[n] = *std::max_element(kmax.begin(), kmax.end());
  }
  const auto rep = martingale_stats(sup, lam, 1.0, 1.0);
  std::string d;
  for (std::size_t i = 0; i < rep.ns.size(); ++i) {
    d += "n=" + std::to_string(rep.ns[i]) + fmt(" E=%.2e", rep.estimate[i]) + fmt(" bound=%.2e; ", rep.bound[i]);
  }
  const bool ok = rep.within_bound && rep.slope.slope >= -1.35 && rep.slope.slope <= -0.65;
  return {ok, d + fmt("slope=%.3f", rep.slope.slope)};
}

// ---------------------------------------------------------------- 5
Outcome mean_field() {
  // truncated particles against the truncated equation: same limit, no
  // escaping mass left unaccounted
  const double h = 1.0 / 64;
  const std::size_t m = 64;
  const double bound = h * (m - 1);
  const auto k = Kernel::product(1);
  const auto mu0 = quantized_exponential(1.0, h, m);

  SolverConfig cfg;
  cfg.method = Method::RK4;
  cfg.h = h;
  cfg.bound = bound;
  cfg.t_end = 1.0;
  for (int i = 0; i <= 20; ++i) cfg.sample_times.push_back(i / 20.0);
  const auto sol = solve_truncated(mu0, 0.0, k, cfg);
  Snapshots ref{sol.times, sol.snapshots};

  std::map<std::size_t, std::vector<Snapshots>> ens;
  for (std::size_t n : {100u, 400u, 1600u}) {
    std::vector<Snapshots> v(20);
    parallel_for(v.size(), 0, [&](std::size_t r) {
      Rng rng(5000 + n, r);
      auto tp = truncate(init(n, mu0, h, rng), bound);
      SimOptions opt;
      opt.t_end = 1.0;
      opt.sample_times = cfg.sample_times;
      opt.snapshots = true;
      const auto tr = simulate_truncated(tp, k, opt, rng);
      v[r] = Snapshots{cfg.sample_times, tr.snapshots};
    });
    ens[n] = std::move(v);
  }
  const auto rep = mean_field_convergence(ens, ref, WeightFunction::affine());
  std::string d = "medians=";
  for (double x : rep.medians) d += fmt("%.3e ", x);
  const bool ok = rep.strictly_decreasing && rep.slope.slope >= -0.8 && rep.slope.slope <= -0.2;
  return {ok, d + fmt("slope=%.3f", rep.slope.slope)};
}

// ---------------------------------------------------------------- 6
Outcome picard_scheme() {
  const double h = 1.0 / 16;
  DiscreteMeasure mu0({{h, 0.5}, {2 * h, 0.5}}, h);
  double c = 1.0 / moments(mu0).phi;
  while (moments(mu0.scaled(c)).phi > 1.0) c = std::nextafter(c, 0.0);
  const auto r = picard(mu0.scaled(c), 0.0, Kernel::product(1), h, 1.0, 20, 64);
  double fmax = 0;
  for (double x : r.f_sup) fmax = std::max(fmax, x);
  const bool ok = fmax <= std::sqrt(2.0) + 1e-9 && r.geometric;
  return {ok, fmt("C=%.3f", r.C) + fmt(" T=%.4f", r.T) + fmt(" sup f=%.6f", fmax) +
                  fmt(" g2=%.2e", r.g_sup[2]) + fmt(" g20=%.2e", r.g_sup.back()) +
                  (r.geometric ? " geometric" : " NOT geometric")};
}

// ---------------------------------------------------------------- 7
Outcome truncation() {
  const double h = 1.0 / 16;
  const auto k = Kernel::product(1);
  const auto mu0 = quantized_exponential(0.5, h, 48);
  SolverConfig cfg;
  cfg.h = h;
  cfg.t_end = 1.0;
  for (int i = 0; i <= 10; ++i) cfg.sample_times.push_back(i / 10.0);
  const auto lr = solve_limit(mu0, k, cfg, {1.0, 2.0, 3.0, 4.0});

  std::uint64_t checks = 0;
  bool snap_ok = true;
  parallel_for(50, 0, [&](std::size_t seed) {
    Rng rng(7000, seed);
    const auto x0 = init_exponential(200, 0.5, h, rng);
    SimOptions opt;
    opt.t_end = 1.0;
    opt.snapshots = true;
    for (int i = 0; i <= 10; ++i) opt.sample_times.push_back(i / 10.0);
    const auto cr = simulate_coupled(x0, 1.0, 2.0, k, opt, rng);
    // independent check on the snapshots: every cell count of X^B at most that of X^B'
    bool ok = cr.domination_checks > 0;
    for (std::size_t s = 0; s < cr.small.snapshots.size(); ++s) {
      const auto a = cr.small.snapshots[s], b = cr.large.snapshots[s];
      const auto len = std::max(a.empty() ? 0 : a.max_cell(), b.empty() ? 0 : b.max_cell()) + 1;
      const auto da = a.to_dense(len), db = b.to_dense(len);
      for (std::size_t c = 0; c < len; ++c) ok = ok && da[c] <= db[c];
    }
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    checks += cr.domination_checks;
    snap_ok = snap_ok && ok;
  });
  const bool ok = lr.max_monotonicity_violation <= 1e-9 && lr.max_conservation_spread <= 1e-10 && snap_ok;
  return {ok, fmt("monotonicity violation=%.2e", lr.max_monotonicity_violation) +
                  fmt(" conserved spread=%.2e", lr.max_conservation_spread) + " coupled seeds=50 checks=" +
                  std::to_string(checks) + (snap_ok ? " dominated" : " NOT dominated")};
}

// ---------------------------------------------------------------- 8
Outcome envelope() {
  const double h = 1.0 / 16;
  const DiscreteMeasure mu0({{h, 0.5}, {4 * h, 0.5}}, h);
  const double z = zeta(mu0);
  SolverConfig cfg;
  cfg.h = h;
  cfg.bound = 16.0;
  cfg.t_end = 0.8 * z;
  cfg.snapshots = false;
  for (int i = 0; i <= 40; ++i) cfg.sample_times.push_back(cfg.t_end * i / 40.0);
  const auto r = solve_truncated(mu0, 0.0, Kernel::product(1), cfg);
  double worst = 0;
  for (const auto& s : r.samples) worst = std::max(worst, s.phi2 / phi2_bound(mu0, s.t));
  return {worst <= 1.0 + 1e-6, fmt("zeta=%.4f", z) + fmt(" max <phi^2>/bound=%.6f", worst) +
                                   fmt(" lambda(end)=%.2e", r.final_lambda)};
}

// ---------------------------------------------------------------- 9
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

Outcome oracle() {
  const double h = 1.0 / 16;
  const std::size_t n = 40, reps = 500;
  const auto k = Kernel::product(1);
  const auto f = [](double w) { return w * w; };
  std::vector<double> thin(reps), exact(reps);
  parallel_for(reps, 0, [&](std::size_t r) {
    SimOptions opt;
    opt.t_end = 0.5;
    Rng a(9001, r), b(9002, r);
    auto sa = init_exponential(n, 1.0, h, a);
    simulate(sa, k, WeightFunction::affine(), opt, a);
    auto sb = init_exponential(n, 1.0, h, b);
    simulate_reference(sb, k, opt, b);
    thin[r] = moment(sa.empirical(), f);
    exact[r] = moment(sb.empirical(), f);
  });
  const double d = ks_statistic(thin, exact);
  const double crit = 1.628 * std::sqrt(2.0 / double(reps));
  return {d < crit, fmt("KS D=%.4f", d) + fmt(" critical(1%%)=%.4f", crit)};
}

// ---------------------------------------------------------------- 10
Outcome spectra() {
  Rng rng(10, 0);
  const double h = 1.0 / 64;
  auto st = init_exponential(4000, 1.0, h, rng);
  SimOptions opt;
  opt.t_end = 2.0;
  simulate(st, Kernel::product(1), WeightFunction::affine(), opt, rng);
  std::string d = "exploratory, no gate: ";
  try {
    const auto fit = powerlaw_fit(st.empirical(), 0.5, 8.0, 12);
    d += fmt("slope=%.3f", fit.slope) + fmt(" +- %.3f", fit.stderr_) + " over [0.5, 8)";
  } catch (const std::exception& e) {
    d += std::string("no fit (") + e.what() + ")";
  }
  return {true, d};
}

}  // namespace

int main() {
  report(1, "exact conservation", 10, conservation);
  report(2, "collision identities", 5, identities);
  report(3, "counting-measure correction", 0, counting);
  report(4, "martingale bound and scaling", 180, martingale);
  report(5, "mean-field convergence", 300, mean_field);
  report(6, "Picard scheme", 0, picard_scheme);
  report(7, "truncation structure", 0, truncation);
  report(8, "a-priori phi^2 envelope", 0, envelope);
  report(9, "thinning vs reference law", 120, oracle);
  report(10, "power-law spectra", 0, spectra);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
