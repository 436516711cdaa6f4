#include "wavekin/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "wavekin/rng.hpp"

namespace wavekin {

using json = nlohmann::ordered_json;

LinearFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("ols: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      sse += r * r;
    }
    f.slope_stderr = std::sqrt(sse / (n - 2.0) / sxx);
  }
  return f;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

namespace {

double statistic(const std::vector<double>& v, Statistic s) {
  if (s == Statistic::Median) return median(v);
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

}  // namespace

SlopeCI loglog_slope(const std::vector<double>& x, const std::vector<std::vector<double>>& groups,
                     Statistic stat, std::size_t resamples, std::uint64_t seed) {
  if (x.size() != groups.size()) throw std::invalid_argument("loglog_slope: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (groups[i].empty()) throw std::invalid_argument("loglog_slope: empty group");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(statistic(groups[i], stat)));
  }
  SlopeCI ci;
  ci.slope = ols(lx, ly).slope;
  Rng rng(seed, 0);
  std::vector<double> slopes;
  slopes.reserve(resamples);
  std::vector<double> buf;
  for (std::size_t r = 0; r < resamples; ++r) {
    std::vector<double> by;
    for (const auto& g : groups) {
      buf.resize(g.size());
      for (auto& b : buf) b = g[rng.below(g.size())];
      by.push_back(std::log(statistic(buf, stat)));
    }
    const double s = ols(lx, by).slope;
    if (std::isfinite(s)) slopes.push_back(s);
  }
  if (slopes.empty()) {
    ci.lo = ci.hi = ci.slope;
  } else {
    ci.lo = quantile(slopes, 0.025);
    ci.hi = quantile(slopes, 0.975);
  }
  return ci;
}

double sup_weak_error(const Snapshots& particles, const Snapshots& reference,
                      const WeightFunction& w) {
  if (particles.times.size() != reference.times.size()) {
    throw std::invalid_argument("sample grids differ: " + std::to_string(particles.times.size()) +
                                " vs " + std::to_string(reference.times.size()) + " times");
  }
  double err = 0.0;
  for (std::size_t s = 0; s < particles.times.size(); ++s) {
    const double a = particles.times[s], b = reference.times[s];
    if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(b))) {
      throw std::invalid_argument("sample grids differ at index " + std::to_string(s));
    }
    err = std::max(err, weak_distance(phi_transform(particles.measures[s], w),
                                      phi_transform(reference.measures[s], w)));
  }
  return err;
}

ConvergenceReport mean_field_convergence(const std::map<std::size_t, std::vector<Snapshots>>& ensembles,
                                         const Snapshots& reference, const WeightFunction& w) {
  ConvergenceReport r;
  std::vector<double> xs;
  for (const auto& [n, reps] : ensembles) {
    std::vector<double> errs;
    for (const auto& s : reps) errs.push_back(sup_weak_error(s, reference, w));
    r.ns.push_back(n);
    xs.push_back(static_cast<double>(n));
    r.medians.push_back(median(errs));
    r.q25.push_back(quantile(errs, 0.25));
    r.q75.push_back(quantile(errs, 0.75));
    r.errors.push_back(std::move(errs));
  }
  r.strictly_decreasing = r.medians.size() >= 2;
  for (std::size_t i = 1; i < r.medians.size(); ++i) {
    if (!(r.medians[i] < r.medians[i - 1])) r.strictly_decreasing = false;
  }
  bool positive = r.ns.size() >= 2;
  for (double m : r.medians) positive = positive && m > 0.0;
  if (positive) r.slope = loglog_slope(xs, r.errors, Statistic::Median);
  return r;
}

double reachable_kernel_bound(const Kernel& k, double omega_total) {
  double best = k(omega_total, omega_total, omega_total);
  constexpr int kSteps = 32;
  for (int a = 0; a <= kSteps; ++a) {
    for (int b = 0; b <= kSteps; ++b) {
      for (int c = 0; c <= kSteps; ++c) {
        best = std::max(best, k(omega_total * a / kSteps, omega_total * b / kSteps,
                                omega_total * c / kSteps));
      }
    }
  }
  return best;
}

double martingale_sup_sq(const Trajectory& traj, const std::function<double(double)>& f,
                         const Kernel& k) {
  double sup = 0.0;
  for (const auto& p : extract_martingale(traj, f, k)) sup = std::max(sup, p.value * p.value);
  return sup;
}

MartingaleReport martingale_stats(const std::map<std::size_t, std::vector<double>>& sup_sq,
                                  const std::map<std::size_t, double>& lambda, double f_sup,
                                  double t) {
  MartingaleReport r;
  std::vector<double> xs;
  std::vector<std::vector<double>> groups;
  bool positive = true;
  for (const auto& [n, v] : sup_sq) {
    if (v.empty()) throw std::invalid_argument("martingale_stats: no replicas for n = " + std::to_string(n));
    const double cnt = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= cnt;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var = v.size() > 1 ? var / (cnt - 1.0) : 0.0;
    const double lam = lambda.at(n);
    r.ns.push_back(n);
    r.estimate.push_back(mean);
    r.stderr_.push_back(std::sqrt(var / cnt));
    r.lambda.push_back(lam);
    r.bound.push_back(32.0 * f_sup * f_sup * lam * lam * t / static_cast<double>(n));
    r.replicas.push_back(v.size());
    if (mean > r.bound.back()) r.within_bound = false;
    positive = positive && mean > 0.0;
    xs.push_back(static_cast<double>(n));
    groups.push_back(v);
  }
  if (positive && xs.size() >= 2) r.slope = loglog_slope(xs, groups, Statistic::Mean);
  return r;
}

ConservationReport conservation_report(const std::vector<MomentSample>& samples, bool particle) {
  ConservationReport r;
  if (samples.empty()) return r;
  const auto& s0 = samples.front();
  const double c0 = s0.phi + s0.Lambda.value_or(0.0);
  r.integer_checked = particle;
  r.exact_W = particle;
  r.exact_E = particle;
  for (const auto& s : samples) {
    r.drift_W = std::max(r.drift_W, std::abs(s.W - s0.W));
    r.drift_E = std::max(r.drift_E, std::abs(s.E - s0.E));
    r.drift_phi_lambda = std::max(r.drift_phi_lambda, std::abs(s.phi + s.Lambda.value_or(0.0) - c0));
    if (particle) {
      if (s.alive + s.lambda_count != s0.alive + s0.lambda_count) r.exact_W = false;
      if (s.cell_sum + s.lambda_cells != s0.cell_sum + s0.lambda_cells) r.exact_E = false;
    }
  }
  auto rel = [](double d, double ref) { return ref != 0.0 ? d / std::abs(ref) : d; };
  r.rel_drift_W = rel(r.drift_W, s0.W);
  r.rel_drift_E = rel(r.drift_E, s0.E);
  r.rel_drift_phi_lambda = rel(r.drift_phi_lambda, c0);
  return r;
}

PowerlawFit powerlaw_fit(const DiscreteMeasure& mu, double lo, double hi, std::size_t bins) {
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("powerlaw_fit: need 0 < lo < hi");
  if (bins < 8) throw std::invalid_argument("powerlaw_fit: need at least 8 bins");
  const double llo = std::log(lo), lhi = std::log(hi);
  const double step = (lhi - llo) / static_cast<double>(bins);
  std::vector<double> mass(bins, 0.0);
  for (const auto& a : mu.atoms()) {
    if (a.omega < lo || a.omega >= hi) continue;
    auto b = static_cast<std::size_t>((std::log(a.omega) - llo) / step);
    b = std::min(b, bins - 1);
    mass[b] += a.weight;
  }
  std::vector<double> x, y;
  for (std::size_t b = 0; b < bins; ++b) {
    if (!(mass[b] > 0.0)) continue;
    const double e0 = std::exp(llo + step * static_cast<double>(b));
    const double e1 = std::exp(llo + step * static_cast<double>(b + 1));
    x.push_back(0.5 * (std::log(e0) + std::log(e1)));
    y.push_back(std::log(mass[b] / (e1 - e0)));
  }
  if (x.size() < 8) {
    throw std::invalid_argument("powerlaw_fit: only " + std::to_string(x.size()) +
                                " nonempty bins in the window (need 8)");
  }
  const auto f = ols(x, y);
  return {f.slope, f.slope_stderr, x.size()};
}

namespace {

json slope_json(const SlopeCI& s) { return json{{"slope", s.slope}, {"ci_lo", s.lo}, {"ci_hi", s.hi}}; }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string to_json(const ConvergenceReport& r) {
  json j;
  j["schema"] = 1;
  j["kind"] = "convergence";
  j["n"] = r.ns;
  j["median"] = r.medians;
  j["q25"] = r.q25;
  j["q75"] = r.q75;
  j["errors"] = r.errors;
  j["slope"] = slope_json(r.slope);
  j["strictly_decreasing"] = r.strictly_decreasing;
  return dump(j);
}

std::string to_json(const MartingaleReport& r) {
  json j;
  j["schema"] = 1;
  j["kind"] = "martingale";
  j["n"] = r.ns;
  j["estimate"] = r.estimate;
  j["stderr"] = r.stderr_;
  j["bound"] = r.bound;
  j["Lambda"] = r.lambda;
  j["replicas"] = r.replicas;
  j["slope"] = slope_json(r.slope);
  j["within_bound"] = r.within_bound;
  return dump(j);
}

std::string to_json(const ConservationReport& r) {
  json j;
  j["schema"] = 1;
  j["kind"] = "conservation";
  j["drift_W"] = r.drift_W;
  j["drift_E"] = r.drift_E;
  j["drift_phi_lambda"] = r.drift_phi_lambda;
  j["rel_drift_W"] = r.rel_drift_W;
  j["rel_drift_E"] = r.rel_drift_E;
  j["rel_drift_phi_lambda"] = r.rel_drift_phi_lambda;
  if (r.integer_checked) {
    j["exact_W"] = r.exact_W;
    j["exact_E"] = r.exact_E;
  }
  return dump(j);
}

std::string to_text(const ConvergenceReport& r) {
  std::ostringstream os;
  os << std::setw(8) << "n" << std::setw(16) << "median" << std::setw(16) << "q25" << std::setw(16)
     << "q75" << '\n';
  for (std::size_t i = 0; i < r.ns.size(); ++i) {
    os << std::setw(8) << r.ns[i] << std::setw(16) << std::setprecision(6) << r.medians[i]
       << std::setw(16) << r.q25[i] << std::setw(16) << r.q75[i] << '\n';
  }
  if (r.ns.size() >= 2) {
    os << "slope " << r.slope.slope << "  [" << r.slope.lo << ", " << r.slope.hi << "]\n";
    os << "strictly decreasing: " << (r.strictly_decreasing ? "yes" : "no") << '\n';
  } else {
    os << "slope: needs at least two values of n\n";
  }
  return os.str();
}

std::string to_text(const MartingaleReport& r) {
  std::ostringstream os;
  os << std::setw(8) << "n" << std::setw(16) << "E sup|M|^2" << std::setw(16) << "stderr"
     << std::setw(16) << "bound" << '\n';
  for (std::size_t i = 0; i < r.ns.size(); ++i) {
    os << std::setw(8) << r.ns[i] << std::setw(16) << std::setprecision(6) << r.estimate[i]
       << std::setw(16) << r.stderr_[i] << std::setw(16) << r.bound[i] << '\n';
  }
  os << "slope " << r.slope.slope << "  [" << r.slope.lo << ", " << r.slope.hi << "]\n";
  return os.str();
}

std::string to_text(const ConservationReport& r) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "drift W           " << r.drift_W << "  (rel " << r.rel_drift_W << ")\n";
  os << "drift E           " << r.drift_E << "  (rel " << r.rel_drift_E << ")\n";
  os << "drift phi+Lambda  " << r.drift_phi_lambda << "  (rel " << r.rel_drift_phi_lambda << ")\n";
  if (r.integer_checked) {
    os << "exact W           " << (r.exact_W ? "yes" : "no") << '\n';
    os << "exact E           " << (r.exact_E ? "yes" : "no") << '\n';
  }
  return os.str();
}

}  // namespace wavekin
