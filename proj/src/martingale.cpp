#include <bit>
#include <memory>

#include "wavekin/collision.hpp"
#include "wavekin/particle.hpp"

namespace wavekin {

namespace {

// <f, Q^(n)(X)> on the dense grid of occupied cells. The grid grows by
// doubling when a particle moves past it.
class CountingDrift {
 public:
  CountingDrift(const Kernel& k, const std::function<double(double)>& f, double h, std::size_t n)
      : k_(k), f_(f), h_(h), n_(static_cast<double>(n)) {}

  void ensure(std::uint64_t max_cell) {
    if (grid_ && max_cell < grid_->cells()) return;
    const std::size_t m = std::bit_ceil(static_cast<std::size_t>(max_cell) + 1);
    grid_ = std::make_unique<CollisionGrid>(k_, h_, m);
    fvals_.resize(2 * m - 1);
    for (std::size_t c = 0; c < fvals_.size(); ++c) fvals_[c] = f_(static_cast<double>(c) * h_);
  }

  std::size_t cells() const { return grid_->cells(); }
  double fval(std::uint64_t c) {
    ensure(c / 2);
    return c < fvals_.size() ? fvals_[c] : f_(static_cast<double>(c) * h_);
  }

  double operator()(const std::vector<std::uint64_t>& counts) {
    const std::size_t m = grid_->cells();
    u_.assign(m, 0.0);
    for (std::size_t c = 0; c < counts.size() && c < m; ++c) u_[c] = static_cast<double>(counts[c]) / n_;
    grid_->scatter(u_, 2 * m - 1, Truncation::Overflow, res_);
    CompensatedSum s;
    for (std::size_t c = 0; c < res_.gain.size(); ++c) {
      if (res_.gain[c] != 0.0) s.add(fvals_[c] * res_.gain[c]);
    }
    for (std::size_t c = 0; c < m; ++c) {
      if (res_.loss[c] != 0.0) s.add(-fvals_[c] * res_.loss[c]);
    }
    // triples whose first two slots are the same particle
    CompensatedSum diag;
    for (std::size_t a = 0; a < m; ++a) {
      if (u_[a] == 0.0) continue;
      for (std::size_t c = 0; c <= std::min(2 * a, m - 1); ++c) {
        if (u_[c] == 0.0) continue;
        const double wa = static_cast<double>(a) * h_, wc = static_cast<double>(c) * h_;
        const double bracket = fvals_[2 * a - c] + fvals_[c] - 2.0 * fvals_[a];
        diag.add(0.5 * k_(wa, wa, wc) * u_[a] * u_[c] * bracket);
      }
    }
    return s.value() - diag.value() / n_;
  }

 private:
  const Kernel& k_;
  const std::function<double(double)>& f_;
  double h_;
  double n_;
  std::unique_ptr<CollisionGrid> grid_;
  std::vector<double> fvals_;
  std::vector<double> u_;
  CollisionGrid::Result res_;
};

}  // namespace

std::vector<MartingalePoint> extract_martingale(const Trajectory& traj,
                                                const std::function<double(double)>& f,
                                                const Kernel& k) {
  if (traj.bound_cell || !traj.initial_alive.empty()) {
    throw std::invalid_argument("extract_martingale: needs an untruncated trajectory");
  }
  if (traj.initial_cells.size() != traj.n) {
    throw std::invalid_argument("extract_martingale: trajectory has no initial state");
  }
  if (traj.accepted != traj.events.size()) {
    throw std::invalid_argument("extract_martingale: trajectory lacks a full event log");
  }
  const double nd = static_cast<double>(traj.n);
  std::vector<std::uint64_t> cells = traj.initial_cells;
  std::uint64_t max_cell = 0;
  for (auto c : cells) max_cell = std::max(max_cell, c);

  CountingDrift drift(k, f, traj.h, traj.n);
  drift.ensure(max_cell);
  std::vector<std::uint64_t> counts(drift.cells(), 0);
  CompensatedSum fx;
  for (auto c : cells) {
    ++counts[c];
    fx.add(drift.fval(c) / nd);
  }
  const double fx0 = fx.value();

  std::vector<MartingalePoint> path;
  path.reserve(2 * traj.events.size() + 2);
  path.push_back({0.0, 0.0});
  CompensatedSum integral;
  double last = 0.0;
  double q = drift(counts);
  for (const auto& ev : traj.events) {
    integral.add((ev.t - last) * q);
    path.push_back({ev.t, fx.value() - fx0 - integral.value()});
    const std::uint64_t ci = ev.before[0], cj = ev.before[1], cl = ev.before[2];
    fx.add((drift.fval(ev.out) + drift.fval(cl) - drift.fval(ci) - drift.fval(cj)) / nd);
    if (ev.out >= counts.size()) {
      drift.ensure(ev.out);
      counts.resize(drift.cells(), 0);
    }
    --counts[ci];
    --counts[cj];
    ++counts[ev.out];
    ++counts[cl];
    path.push_back({ev.t, fx.value() - fx0 - integral.value()});
    last = ev.t;
    q = drift(counts);
  }
  integral.add((traj.t_end - last) * q);
  path.push_back({traj.t_end, fx.value() - fx0 - integral.value()});
  return path;
}

}  // namespace wavekin
