// Coupled truncated processes for B <= B'.
//
// One majorant clock of rate Phi'^3 / n^2 proposes ordered phi-weighted
// triples (i, j, l) among the particles alive in B'. With p = K 1_D / (phi phi phi)
// (p = 0 when i == j) and u uniform:
//   u < p/2      shared jump clock T_ijl: B' jumps; B mirrors it when i, j, l
//                are all alive in B, otherwise kills whichever of i, j it holds
//   u >= p       complement clock S_ijl: kills i in B when i is alive in B and
//                j or l is not
//   otherwise    nothing
// A second clock of rate nu' Phi' kills a phi-weighted particle of B' (and the
// same particle in B). Summing the branches, particle i of B is killed at rate
// phi_i * (Lambda^2 + 2 Lambda <phi, X^B>) as in the single-level process.
#include <algorithm>
#include <limits>

#include "particle_internal.hpp"
#include "wavekin/fenwick.hpp"
#include "wavekin/particle.hpp"

namespace wavekin {

namespace {

struct Side {
  TruncatedParticles tp;
  std::uint64_t alive_count = 0;
  std::uint64_t alive_cells = 0;
  Trajectory traj;

  explicit Side(TruncatedParticles p) : tp(std::move(p)) {
    for (std::size_t i = 0; i < tp.state.n(); ++i) {
      if (!tp.alive[i]) continue;
      ++alive_count;
      alive_cells += tp.state.cell(i);
    }
  }

  double lambda() const { return tp.lambda(); }
  bool alive(std::size_t i) const { return tp.alive[i]; }

  void kill(std::size_t i, double t, const SimOptions& opt) {
    const std::uint64_t c = tp.state.cell(i);
    tp.alive[i] = false;
    --alive_count;
    alive_cells -= c;
    ++tp.lambda_count;
    tp.lambda_cells += c;
    ++traj.kills;
    if (opt.record_events) {
      JumpEvent ev;
      ev.t = t;
      ev.kind = EventKind::Kill;
      ev.i = i;
      ev.before[0] = c;
      ev.out = c;
      detail::push_event(traj, opt, ev);
    }
  }

  // Returns true when the output escaped B.
  bool jump(std::size_t i, std::size_t j, std::size_t l, double t, const SimOptions& opt) {
    JumpEvent ev;
    ev.t = t;
    ev.i = i;
    ev.j = j;
    ev.l = l;
    ev.before[0] = tp.state.cell(i);
    ev.before[1] = tp.state.cell(j);
    ev.before[2] = tp.state.cell(l);
    ev.out = tp.state.apply_jump(i, j, l);
    const bool escaped = ev.out > tp.bound_cell;
    if (escaped) {
      ev.kind = EventKind::Escape;
      tp.alive[i] = false;
      --alive_count;
      alive_cells = alive_cells - ev.before[0] - ev.before[1] + ev.before[2];
      ++tp.lambda_count;
      tp.lambda_cells += ev.out;
      ++traj.escapes;
    }
    ++traj.accepted;
    if (opt.record_events) detail::push_event(traj, opt, ev);
    return escaped;
  }

  void record(double t, const SimOptions& opt) {
    static const WeightFunction affine = WeightFunction::affine();
    traj.samples.push_back(detail::make_sample(t, tp.state, tp.alive, affine, true,
                                               tp.lambda_count, tp.lambda_cells));
    if (opt.snapshots) traj.snapshots.push_back(tp.measure());
  }
};

void check_pair(const Side& s, const Side& l, std::size_t i) {
  if (s.alive(i) && (!l.alive(i) || s.tp.state.cell(i) != l.tp.state.cell(i))) {
    throw std::logic_error("coupled truncation: particle " + std::to_string(i) +
                           " alive in B but not matched in B'");
  }
}

}  // namespace

CoupledResult simulate_coupled(const ParticleState& initial, double bound_small,
                               double bound_large, const Kernel& k, const SimOptions& opt,
                               Rng& rng) {
  if (!(bound_small <= bound_large)) {
    throw std::invalid_argument("simulate_coupled: need B <= B'");
  }
  const auto times = detail::sample_grid(opt);
  Side small(truncate(initial, bound_small));
  Side large(truncate(initial, bound_large));
  const std::size_t n = initial.n();
  const double nd = static_cast<double>(n);
  const double h = initial.h();
  for (Side* s : {&small, &large}) {
    s->traj.h = h;
    s->traj.n = n;
    s->traj.t_end = opt.t_end;
    s->traj.bound_cell = s->tp.bound_cell;
    s->traj.initial_cells = s->tp.state.cells();
    s->traj.initial_alive = s->tp.alive;
  }

  CoupledResult res;
  auto full_check = [&] {
    for (std::size_t i = 0; i < n; ++i) check_pair(small, large, i);
    ++res.domination_checks;
  };
  full_check();

  std::vector<double> phi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) phi[i] = large.alive(i) ? 1.0 + large.tp.state.omega(i) : 0.0;
  Fenwick fw(phi);
  auto set_phi = [&](std::size_t i) {
    phi[i] = large.alive(i) ? 1.0 + large.tp.state.omega(i) : 0.0;
    fw.set(i, phi[i]);
  };
  auto draw = [&] {
    const double total = fw.total();
    for (;;) {
      const std::size_t i = fw.find(rng.uniform() * total);
      if (i < n && phi[i] > 0.0) return i;
    }
  };

  std::size_t next_sample = 0;
  double t = 0.0;
  std::uint64_t events = 0;
  for (;;) {
    const double phi_total =
        static_cast<double>(large.alive_count) + h * static_cast<double>(large.alive_cells);
    const double lam = large.lambda();
    const double rate_cand = phi_total * phi_total * phi_total / (nd * nd);
    const double rate_kill = (lam * lam + 2.0 * lam * phi_total / nd) * phi_total;
    const double rate = rate_cand + rate_kill;
    const double t_next =
        rate > 0.0 ? t + rng.exponential() / rate : std::numeric_limits<double>::infinity();
    while (next_sample < times.size() && times[next_sample] < t_next) {
      full_check();
      small.record(times[next_sample], opt);
      large.record(times[next_sample], opt);
      ++next_sample;
    }
    if (t_next > opt.t_end) break;
    t = t_next;

    if (rate_kill > 0.0 && rng.uniform() * rate < rate_kill) {
      const std::size_t i = draw();
      large.kill(i, t, opt);
      if (small.alive(i)) small.kill(i, t, opt);
      set_phi(i);
      check_pair(small, large, i);
      ++res.domination_checks;
    } else {
      const std::size_t i = draw();
      const std::size_t j = draw();
      const std::size_t l = draw();
      const double u = rng.uniform();
      const auto& st = large.tp.state;
      double p = 0.0;
      if (i != j && st.cell(i) + st.cell(j) >= st.cell(l)) {
        const double w1 = st.omega(i), w2 = st.omega(j), w3 = st.omega(l);
        p = k(w1, w2, w3) / (phi[i] * phi[j] * phi[l]);
        if (p > 1.0 + 1e-12) detail::throw_ratio(w1, w2, w3, p);
      }
      if (u < 0.5 * p) {
        const bool mirrored = small.alive(i) && small.alive(j) && small.alive(l);
        if (mirrored) {
          small.jump(i, j, l, t, opt);
        } else {
          if (small.alive(i)) small.kill(i, t, opt);
          if (small.alive(j)) small.kill(j, t, opt);
        }
        large.jump(i, j, l, t, opt);
        set_phi(i);
        set_phi(j);
      } else if (u >= p) {
        if (small.alive(i) && (!small.alive(j) || !small.alive(l))) small.kill(i, t, opt);
      }
      check_pair(small, large, i);
      check_pair(small, large, j);
      check_pair(small, large, l);
      ++res.domination_checks;
    }
    if (++events % 65536 == 0) fw.assign(phi);
  }
  while (next_sample < times.size()) {
    full_check();
    small.record(times[next_sample], opt);
    large.record(times[next_sample], opt);
    ++next_sample;
  }
  for (Side* s : {&small, &large}) {
    s->traj.final_lambda_count = s->tp.lambda_count;
    s->traj.final_lambda_cells = s->tp.lambda_cells;
  }
  res.small = std::move(small.traj);
  res.large = std::move(large.traj);
  return res;
}

}  // namespace wavekin
