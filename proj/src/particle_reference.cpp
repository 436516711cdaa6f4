#include <limits>

#include "particle_internal.hpp"
#include "wavekin/particle.hpp"

namespace wavekin {

Trajectory simulate_reference(ParticleState& state, const Kernel& k, const SimOptions& opt,
                              Rng& rng) {
  const std::size_t n = state.n();
  if (n > 200) throw std::invalid_argument("simulate_reference: n <= 200 required (O(n^3) per event)");
  const auto times = detail::sample_grid(opt);
  const std::vector<bool> alive(n, true);
  const WeightFunction affine = WeightFunction::affine();
  const double nn = static_cast<double>(n) * static_cast<double>(n);

  Trajectory traj;
  traj.h = state.h();
  traj.n = n;
  traj.t_end = opt.t_end;
  traj.initial_cells = state.cells();

  auto record = [&](double t) {
    traj.samples.push_back(detail::make_sample(t, state, alive, affine, false, 0, 0));
    if (opt.snapshots) traj.snapshots.push_back(state.empirical());
  };

  // one clock per unordered pair i < j and catalyst l, rate K / n^2
  std::vector<double> rates;
  rates.reserve(n * (n - 1) / 2 * n);
  std::size_t next_sample = 0;
  double t = 0.0;
  for (;;) {
    rates.clear();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        for (std::size_t l = 0; l < n; ++l) {
          double r = 0.0;
          if (state.cell(i) + state.cell(j) >= state.cell(l)) {
            r = k(state.omega(i), state.omega(j), state.omega(l)) / nn;
          }
          rates.push_back(r);
          total += r;
        }
      }
    }
    const double t_next =
        total > 0.0 ? t + rng.exponential() / total : std::numeric_limits<double>::infinity();
    while (next_sample < times.size() && times[next_sample] < t_next) record(times[next_sample++]);
    if (t_next > opt.t_end) break;
    t = t_next;

    double target = rng.uniform() * total;
    std::size_t idx = 0;
    for (; idx + 1 < rates.size(); ++idx) {
      if (rates[idx] > 0.0 && target < rates[idx]) break;
      target -= rates[idx];
    }
    while (rates[idx] == 0.0) --idx;  // rounding past the end
    // decode idx -> (i, j, l)
    std::size_t i = 0, rem = idx;
    for (;; ++i) {
      const std::size_t block = (n - i - 1) * n;
      if (rem < block) break;
      rem -= block;
    }
    const std::size_t j = i + 1 + rem / n;
    const std::size_t l = rem % n;

    JumpEvent ev;
    ev.t = t;
    ev.i = i;
    ev.j = j;
    ev.l = l;
    ev.before[0] = state.cell(i);
    ev.before[1] = state.cell(j);
    ev.before[2] = state.cell(l);
    ev.out = state.apply_jump(i, j, l);
    ++traj.accepted;
    ++traj.candidates;
    if (opt.record_events) detail::push_event(traj, opt, ev);
  }
  while (next_sample < times.size()) record(times[next_sample++]);
  return traj;
}

}  // namespace wavekin
