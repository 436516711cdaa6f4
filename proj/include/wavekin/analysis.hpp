// Post-processing: mean-field convergence, martingale statistics,
// conservation drift and exploratory spectral slopes. Everything here is a
// deterministic function of its inputs; bootstrap resampling uses a fixed seed.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wavekin/kernels.hpp"
#include "wavekin/measures.hpp"
#include "wavekin/particle.hpp"
#include "wavekin/trajectory_io.hpp"

namespace wavekin {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

/// Ordinary least squares y = a + b x. Needs at least two distinct x.
LinearFit ols(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> v);
double quantile(std::vector<double> v, double q);  // linear interpolation

enum class Statistic { Median, Mean };

struct SlopeCI {
  double slope = 0.0;
  double lo = 0.0;  // 2.5% bootstrap percentile
  double hi = 0.0;  // 97.5%
};

/// Slope of log(stat(group)) against log(x) with a percentile bootstrap CI
/// obtained by resampling each group with replacement.
SlopeCI loglog_slope(const std::vector<double>& x, const std::vector<std::vector<double>>& groups,
                     Statistic stat, std::size_t resamples = 1000, std::uint64_t seed = 20240101);

/// sup over the shared sample times of d(phi X_s, phi mu_s).
double sup_weak_error(const Snapshots& particles, const Snapshots& reference,
                      const WeightFunction& w);

struct ConvergenceReport {
  std::vector<std::size_t> ns;
  std::vector<std::vector<double>> errors;  // per n, per replica
  std::vector<double> medians, q25, q75;
  SlopeCI slope;
  bool strictly_decreasing = false;
};

/// Throws std::invalid_argument when sample grids differ.
ConvergenceReport mean_field_convergence(const std::map<std::size_t, std::vector<Snapshots>>& ensembles,
                                         const Snapshots& reference, const WeightFunction& w);

/// Lambda = max K over [0, Omega]^3, Omega the total energy n * E of the run
/// (no single particle can exceed it).
double reachable_kernel_bound(const Kernel& k, double omega_total);

/// sup_t |M_t|^2 along one trajectory.
double martingale_sup_sq(const Trajectory& traj, const std::function<double(double)>& f,
                         const Kernel& k);

struct MartingaleReport {
  std::vector<std::size_t> ns;
  std::vector<double> estimate;  // mean of sup|M|^2
  std::vector<double> stderr_;
  std::vector<double> bound;     // 32 ||f||^2 Lambda^2 t / n
  std::vector<double> lambda;
  std::vector<std::size_t> replicas;
  SlopeCI slope;
  bool within_bound = true;
};

/// sup_sq[n] holds one sup|M|^2 per replica, lambda[n] the kernel bound.
MartingaleReport martingale_stats(const std::map<std::size_t, std::vector<double>>& sup_sq,
                                  const std::map<std::size_t, double>& lambda, double f_sup,
                                  double t);

struct ConservationReport {
  double drift_W = 0.0;
  double drift_E = 0.0;
  double drift_phi_lambda = 0.0;  // of <phi, .> + Lambda (Lambda = 0 when absent)
  double rel_drift_W = 0.0;
  double rel_drift_E = 0.0;
  double rel_drift_phi_lambda = 0.0;
  bool integer_checked = false;  // integer fields present (particle runs)
  bool exact_W = false;          // alive + lambda_count constant
  bool exact_E = false;          // cell_sum + lambda_cells constant
};

ConservationReport conservation_report(const std::vector<MomentSample>& samples, bool particle);

struct PowerlawFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  std::size_t bins_used = 0;
};

/// Fits log(mass density) against log(w) over `bins` log-spaced bins of
/// [lo, hi); needs at least 8 nonempty bins. Exploratory only.
PowerlawFit powerlaw_fit(const DiscreteMeasure& mu, double lo, double hi, std::size_t bins = 16);

std::string to_json(const ConvergenceReport& r);
std::string to_json(const MartingaleReport& r);
std::string to_json(const ConservationReport& r);
std::string to_text(const ConvergenceReport& r);
std::string to_text(const MartingaleReport& r);
std::string to_text(const ConservationReport& r);

}  // namespace wavekin
