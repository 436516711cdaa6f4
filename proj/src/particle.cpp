#include "wavekin/particle.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <limits>

#include "particle_internal.hpp"
#include "wavekin/fenwick.hpp"

namespace wavekin {

ParticleState::ParticleState(std::vector<std::uint64_t> cells, double h)
    : cells_(std::move(cells)), h_(h) {
  if (!(h > 0.0)) throw std::invalid_argument("h must be > 0");
  for (auto c : cells_) cell_sum_ += c;
}

std::uint64_t ParticleState::max_cell() const noexcept {
  std::uint64_t m = 0;
  for (auto c : cells_) m = std::max(m, c);
  return m;
}

std::uint64_t ParticleState::apply_jump(std::size_t i, std::size_t j, std::size_t l) {
  if (i == j) throw std::invalid_argument("apply_jump: slots 1 and 2 must be distinct particles");
  if (i >= n() || j >= n() || l >= n()) throw std::out_of_range("apply_jump: index out of range");
  const std::uint64_t ci = cells_[i], cj = cells_[j], cl = cells_[l];
  if (ci + cj < cl) throw std::invalid_argument("apply_jump: triple outside w1 + w2 >= w3");
  const std::uint64_t out = ci + cj - cl;
  cells_[i] = out;
  cells_[j] = cl;
  return out;
}

DiscreteMeasure ParticleState::empirical() const {
  return detail::alive_measure(*this, std::vector<bool>(n(), true));
}

ParticleState init(std::size_t n, const DiscreteMeasure& mu0, double h, std::uint64_t seed,
                   std::uint64_t stream) {
  Rng rng(seed, stream);
  return init(n, mu0, h, rng);
}

namespace {

void check_init_args(std::size_t n, double h) {
  if (n < 2) throw std::invalid_argument("n >= 2 required");
  if (!(h > 0.0)) throw std::invalid_argument("h must be > 0");
}

std::uint64_t to_cell(double omega, double h) {
  // round half to even, independent of the caller's rounding mode
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double c = std::nearbyint(omega / h);
  std::fesetround(saved);
  return static_cast<std::uint64_t>(c);
}

}  // namespace

ParticleState init(std::size_t n, const DiscreteMeasure& mu0, double h, Rng& rng) {
  check_init_args(n, h);
  if (mu0.empty()) throw std::invalid_argument("init: mu0 has no atoms");
  std::vector<double> cdf;
  cdf.reserve(mu0.size());
  double acc = 0.0;
  for (const auto& a : mu0.atoms()) {
    if (a.weight < 0.0) throw std::invalid_argument("init: mu0 must be nonnegative");
    acc += a.weight;
    cdf.push_back(acc);
  }
  if (!(acc > 0.0)) throw std::invalid_argument("init: mu0 has zero mass");
  std::vector<std::uint64_t> cells(n);
  for (auto& c : cells) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    c = to_cell(mu0.atoms()[static_cast<std::size_t>(it - cdf.begin())].omega, h);
  }
  return ParticleState(std::move(cells), h);
}

ParticleState init_exponential(std::size_t n, double mean, double h, Rng& rng) {
  check_init_args(n, h);
  if (!(mean > 0.0)) throw std::invalid_argument("init_exponential: mean must be > 0");
  std::vector<std::uint64_t> cells(n);
  for (auto& c : cells) c = to_cell(mean * rng.exponential(), h);
  return ParticleState(std::move(cells), h);
}

double TruncatedParticles::lambda() const {
  return (static_cast<double>(lambda_count) + state.h() * static_cast<double>(lambda_cells)) /
         static_cast<double>(state.n());
}

DiscreteMeasure TruncatedParticles::measure() const { return detail::alive_measure(state, alive); }

TruncatedParticles truncate(const ParticleState& state, double bound) {
  TruncatedParticles tp{state, std::vector<bool>(state.n(), true),
                        detail::bound_to_cell(bound, state.h()), 0, 0};
  for (std::size_t i = 0; i < state.n(); ++i) {
    if (state.cell(i) > tp.bound_cell) {
      tp.alive[i] = false;
      ++tp.lambda_count;
      tp.lambda_cells += state.cell(i);
    }
  }
  return tp;
}

namespace {

// Majorant thinning for X^n and for the single-level truncated process.
//   candidate jump clock:  rate Phi^3 / (2 n^2), (i, j, l) drawn phi-weighted
//   kill clock:            rate nu * Phi, i drawn phi-weighted
// with Phi the phi-mass of the living particles (absolute units) and
// nu = Lambda^2 + 2 Lambda Phi / n.
class Engine {
 public:
  Engine(ParticleState& st, std::vector<bool>& alive, std::uint64_t bound_cell, bool truncated,
         const Kernel& k, const WeightFunction& w, std::uint64_t lam_count,
         std::uint64_t lam_cells)
      : st_(st),
        alive_(alive),
        bound_cell_(bound_cell),
        truncated_(truncated),
        k_(k),
        w_(w),
        affine_(w.kind() == WeightKind::Affine),
        lam_count_(lam_count),
        lam_cells_(lam_cells),
        n_(static_cast<double>(st.n())) {
    for (std::size_t i = 0; i < st_.n(); ++i) {
      if (!alive_[i]) continue;
      ++alive_count_;
      alive_cells_ += st_.cell(i);
    }
    rebuild();
  }

  Trajectory run(const SimOptions& opt, Rng& rng) {
    const auto times = detail::sample_grid(opt);
    Trajectory traj;
    traj.h = st_.h();
    traj.n = st_.n();
    traj.t_end = opt.t_end;
    if (truncated_) traj.bound_cell = bound_cell_;
    traj.initial_cells = st_.cells();
    if (truncated_) traj.initial_alive = alive_;
    const std::uint64_t conserved_count = alive_count_ + lam_count_;
    const std::uint64_t conserved_cells = alive_cells_ + lam_cells_;

    std::size_t next_sample = 0;
    double t = 0.0;
    std::uint64_t since_check = 0;
    for (;;) {
      const double phi_total = phi_mass();
      const double lam = (static_cast<double>(lam_count_) + st_.h() * static_cast<double>(lam_cells_)) / n_;
      const double rate_jump = phi_total * phi_total * phi_total / (2.0 * n_ * n_);
      const double rate_kill = (lam * lam + 2.0 * lam * phi_total / n_) * phi_total;
      const double rate = rate_jump + rate_kill;
      const double t_next =
          rate > 0.0 ? t + rng.exponential() / rate : std::numeric_limits<double>::infinity();
      while (next_sample < times.size() && times[next_sample] < t_next) {
        record(traj, opt, times[next_sample]);
        ++next_sample;
      }
      if (t_next > opt.t_end) break;
      t = t_next;
      ++traj.candidates;

      const bool kill = rate_kill > 0.0 && rng.uniform() * rate < rate_kill;
      if (kill) {
        const std::size_t i = draw(rng);
        const std::uint64_t ci = st_.cell(i);
        set_dead(i);
        ++lam_count_;
        lam_cells_ += ci;
        ++traj.kills;
        if (opt.record_events) {
          JumpEvent ev;
          ev.t = t;
          ev.kind = EventKind::Kill;
          ev.i = i;
          ev.before[0] = ci;
          ev.out = ci;
          detail::push_event(traj, opt, ev);
        }
      } else {
        const std::size_t i = draw(rng);
        const std::size_t j = draw(rng);
        const std::size_t l = draw(rng);
        const double u = rng.uniform();
        if (i == j) continue;
        const std::uint64_t ci = st_.cell(i), cj = st_.cell(j), cl = st_.cell(l);
        if (ci + cj < cl) continue;
        const double w1 = st_.omega(i), w2 = st_.omega(j), w3 = st_.omega(l);
        const double p = k_(w1, w2, w3) / (phi_[i] * phi_[j] * phi_[l]);
        if (p > 1.0 + 1e-12) detail::throw_ratio(w1, w2, w3, p);
        if (!(u < p)) continue;
        const std::uint64_t out = st_.apply_jump(i, j, l);
        JumpEvent ev;
        ev.t = t;
        ev.i = i;
        ev.j = j;
        ev.l = l;
        ev.before[0] = ci;
        ev.before[1] = cj;
        ev.before[2] = cl;
        ev.out = out;
        if (truncated_ && out > bound_cell_) {
          // i leaves B carrying phi(out); j takes the catalyst value
          ev.kind = EventKind::Escape;
          alive_[i] = false;
          set_weight(i, 0.0);
          set_weight(j, w_(st_.omega(j)));
          --alive_count_;
          alive_cells_ = alive_cells_ - ci - cj + cl;
          ++lam_count_;
          lam_cells_ += out;
          ++traj.escapes;
        } else {
          set_weight(i, w_(st_.omega(i)));
          set_weight(j, w_(st_.omega(j)));
        }
        ++traj.accepted;
        if (opt.record_events) detail::push_event(traj, opt, ev);
      }

      if (++since_check >= 10000) {
        since_check = 0;
        if (alive_count_ + lam_count_ != conserved_count ||
            alive_cells_ + lam_cells_ != conserved_cells) {
          throw std::logic_error("particle engine: conserved integer totals drifted");
        }
        rebuild();
      }
    }
    while (next_sample < times.size()) record(traj, opt, times[next_sample++]);
    traj.final_lambda_count = lam_count_;
    traj.final_lambda_cells = lam_cells_;
    return traj;
  }

 private:
  double phi_mass() const {
    if (affine_) return static_cast<double>(alive_count_) + st_.h() * static_cast<double>(alive_cells_);
    return fenwick_.total();
  }

  void rebuild() {
    phi_.assign(st_.n(), 0.0);
    for (std::size_t i = 0; i < st_.n(); ++i) phi_[i] = alive_[i] ? w_(st_.omega(i)) : 0.0;
    fenwick_.assign(phi_);
  }

  void set_weight(std::size_t i, double p) {
    phi_[i] = p;
    fenwick_.set(i, p);
  }

  void set_dead(std::size_t i) {
    alive_[i] = false;
    set_weight(i, 0.0);
    --alive_count_;
    alive_cells_ -= st_.cell(i);
  }

  std::size_t draw(Rng& rng) {
    const double total = fenwick_.total();
    for (;;) {
      const std::size_t i = fenwick_.find(rng.uniform() * total);
      if (i < st_.n() && phi_[i] > 0.0) return i;
    }
  }

  void record(Trajectory& traj, const SimOptions& opt, double t) {
    traj.samples.push_back(
        detail::make_sample(t, st_, alive_, w_, truncated_, lam_count_, lam_cells_));
    if (opt.snapshots) traj.snapshots.push_back(detail::alive_measure(st_, alive_));
  }

  ParticleState& st_;
  std::vector<bool>& alive_;
  std::uint64_t bound_cell_;
  bool truncated_;
  const Kernel& k_;
  const WeightFunction& w_;
  bool affine_;
  std::uint64_t lam_count_;
  std::uint64_t lam_cells_;
  double n_;
  std::uint64_t alive_count_ = 0;
  std::uint64_t alive_cells_ = 0;
  std::vector<double> phi_;
  Fenwick fenwick_;
};

}  // namespace

Trajectory simulate(ParticleState& state, const Kernel& k, const WeightFunction& w,
                    const SimOptions& opt, Rng& rng) {
  std::vector<bool> alive(state.n(), true);
  Engine eng(state, alive, std::numeric_limits<std::uint64_t>::max(), false, k, w, 0, 0);
  return eng.run(opt, rng);
}

Trajectory simulate_truncated(TruncatedParticles& tp, const Kernel& k, const SimOptions& opt,
                              Rng& rng) {
  if (tp.alive.size() != tp.state.n()) throw std::invalid_argument("alive mask has wrong length");
  for (std::size_t i = 0; i < tp.state.n(); ++i) {
    if (tp.alive[i] && tp.state.cell(i) > tp.bound_cell) {
      throw std::invalid_argument("simulate_truncated: living particle outside B");
    }
  }
  static const WeightFunction affine = WeightFunction::affine();
  Engine eng(tp.state, tp.alive, tp.bound_cell, true, k, affine, tp.lambda_count, tp.lambda_cells);
  auto traj = eng.run(opt, rng);
  tp.lambda_count = traj.final_lambda_count;
  tp.lambda_cells = traj.final_lambda_cells;
  return traj;
}

}  // namespace wavekin
