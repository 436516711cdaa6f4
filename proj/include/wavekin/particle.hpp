// The n-particle instantaneous coagulation-fragmentation process and its
// truncated and coupled variants.
//
// Frequencies live on the grid h * Z: particle values are stored as integer
// cells so waveaction and energy are conserved exactly. A jump on the triple
// (i, j, l) with w_i + w_j >= w_l sets
//   w_i <- w_i + w_j - w_l,  w_j <- w_l
// and fires at rate K(w_i, w_j, w_l) / n^2 per unordered pair {i, j} and l.
// Slot l may be i or j; the jump is then a no-op on the multiset.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavekin/kernels.hpp"
#include "wavekin/measures.hpp"
#include "wavekin/rng.hpp"

namespace wavekin {

class ParticleState {
 public:
  ParticleState(std::vector<std::uint64_t> cells, double h);

  std::size_t n() const noexcept { return cells_.size(); }
  double h() const noexcept { return h_; }
  const std::vector<std::uint64_t>& cells() const noexcept { return cells_; }
  std::uint64_t cell(std::size_t i) const { return cells_[i]; }
  double omega(std::size_t i) const { return static_cast<double>(cells_[i]) * h_; }
  /// Exact sum of cells, i.e. n * E / h.
  std::uint64_t cell_sum() const noexcept { return cell_sum_; }
  std::uint64_t max_cell() const noexcept;

  /// Applies the jump map. Throws std::invalid_argument if i == j or the
  /// triple lies outside the interaction domain. Returns the new cell of i.
  std::uint64_t apply_jump(std::size_t i, std::size_t j, std::size_t l);

  /// (1/n) sum_i delta_{w_i}, in grid mode.
  DiscreteMeasure empirical() const;

  friend bool operator==(const ParticleState&, const ParticleState&) = default;

 private:
  std::vector<std::uint64_t> cells_;
  double h_;
  std::uint64_t cell_sum_ = 0;
};

/// n i.i.d. samples from mu0 (normalised), each rounded to the nearest grid
/// cell. Deterministic given (seed, stream).
ParticleState init(std::size_t n, const DiscreteMeasure& mu0, double h, std::uint64_t seed,
                   std::uint64_t stream = 0);
/// Same, drawing from an existing stream (which then continues into the dynamics).
ParticleState init(std::size_t n, const DiscreteMeasure& mu0, double h, Rng& rng);
/// n i.i.d. Exp(mean) samples rounded to the nearest grid cell.
ParticleState init_exponential(std::size_t n, double mean, double h, Rng& rng);

enum class EventKind { Jump, Escape, Kill };

struct JumpEvent {
  double t = 0.0;
  EventKind kind = EventKind::Jump;
  std::size_t i = 0, j = 0, l = 0;     // l unused for kills
  std::uint64_t before[3] = {0, 0, 0};  // cells of i, j, l before the event
  std::uint64_t out = 0;                // new cell of i (the escaping cell on Escape)
};

/// Moments of (1/n) sum over living particles, plus the overflow scalar for
/// truncated runs. The integer fields carry the exact conserved quantities.
struct MomentSample {
  double t = 0.0;
  double W = 0.0, E = 0.0, phi = 0.0, phi2 = 0.0;
  std::optional<double> Lambda;
  std::uint64_t alive = 0;
  std::uint64_t cell_sum = 0;
  std::uint64_t lambda_count = 0;  // n * Lambda = lambda_count + h * lambda_cells
  std::uint64_t lambda_cells = 0;
};

struct SimOptions {
  double t_end = 1.0;
  /// Times at which moments (and snapshots) are recorded; empty means {0, t_end}.
  std::vector<double> sample_times;
  bool snapshots = false;
  bool record_events = false;
  std::size_t max_events = 50'000'000;
};

struct Trajectory {
  double h = 0.0;
  std::size_t n = 0;
  double t_end = 0.0;
  std::optional<std::uint64_t> bound_cell;  // set for truncated runs
  std::vector<MomentSample> samples;
  std::vector<DiscreteMeasure> snapshots;
  std::vector<std::uint64_t> initial_cells;
  std::vector<bool> initial_alive;  // empty means all alive
  std::vector<JumpEvent> events;
  std::uint64_t candidates = 0;
  std::uint64_t accepted = 0;
  std::uint64_t kills = 0;
  std::uint64_t escapes = 0;
  std::uint64_t final_lambda_count = 0;
  std::uint64_t final_lambda_cells = 0;
};

/// Thrown when a thinning acceptance ratio K / (phi phi phi) exceeds one.
class SubmultiplicativityError : public std::runtime_error {
 public:
  SubmultiplicativityError(const std::string& msg, double w1, double w2, double w3, double ratio)
      : std::runtime_error(msg), w1(w1), w2(w2), w3(w3), ratio(ratio) {}
  double w1, w2, w3, ratio;
};

/// Majorant-thinning simulation of X^n on [0, t_end]. `state` is advanced in place.
Trajectory simulate(ParticleState& state, const Kernel& k, const WeightFunction& w,
                    const SimOptions& opt, Rng& rng);

/// (X^B, Lambda^B) with X^B a subset of the particles: the others are dead.
struct TruncatedParticles {
  ParticleState state;
  std::vector<bool> alive;
  std::uint64_t bound_cell = 0;
  std::uint64_t lambda_count = 0;
  std::uint64_t lambda_cells = 0;

  double lambda() const;  // normalised overflow scalar
  DiscreteMeasure measure() const;
};

/// X^B = 1_B X, Lambda_0 = <phi 1_{B^c}, X> with phi(w) = w + 1.
TruncatedParticles truncate(const ParticleState& state, double bound);

/// Four-branch truncated process (interior jump, escape, kill, null) with
/// affine phi. With every particle inside B and Lambda = 0 it consumes the
/// random stream exactly as simulate() does.
Trajectory simulate_truncated(TruncatedParticles& tp, const Kernel& k, const SimOptions& opt,
                              Rng& rng);

struct CoupledResult {
  Trajectory small;  // bound B
  Trajectory large;  // bound B'
  std::uint64_t domination_checks = 0;
};

/// Runs (X^B, Lambda^B) and (X^B', Lambda^B') for B <= B' from the same initial
/// particles, driven by shared clocks so that X^B <= X^B' holds pathwise.
/// Throws std::logic_error if domination ever fails.
CoupledResult simulate_coupled(const ParticleState& initial, double bound_small,
                               double bound_large, const Kernel& k, const SimOptions& opt,
                               Rng& rng);

/// Exact per-triple-clock simulation (direct method, all rates recomputed
/// after every jump). O(n^3) per event; meant for n <= 60.
Trajectory simulate_reference(ParticleState& state, const Kernel& k, const SimOptions& opt,
                              Rng& rng);

struct MartingalePoint {
  double t;
  double value;
};

/// M_t = <f, X_t> - <f, X_0> - int_0^t <f, Q^(n)(X_s)> ds along a trajectory
/// with a full event log, evaluated just before and just after every jump and
/// at the final time.
std::vector<MartingalePoint> extract_martingale(const Trajectory& traj,
                                                const std::function<double(double)>& f,
                                                const Kernel& k);

}  // namespace wavekin
