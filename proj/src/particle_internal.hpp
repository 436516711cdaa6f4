// Helpers shared by the particle simulators.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavekin/particle.hpp"

namespace wavekin::detail {

inline std::vector<double> sample_grid(const SimOptions& opt) {
  if (!(opt.t_end >= 0.0) || !std::isfinite(opt.t_end)) {
    throw std::invalid_argument("t_end must be finite and >= 0");
  }
  std::vector<double> ts = opt.sample_times;
  if (ts.empty()) ts = {0.0, opt.t_end};
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (ts[k] < 0.0 || ts[k] > opt.t_end) {
      throw std::invalid_argument("sample time " + format_double(ts[k]) + " outside [0, t_end]");
    }
    if (k > 0 && ts[k] <= ts[k - 1]) throw std::invalid_argument("sample times must increase");
  }
  return ts;
}

inline MomentSample make_sample(double t, const ParticleState& st, const std::vector<bool>& alive,
                                const WeightFunction& w, bool truncated,
                                std::uint64_t lam_count, std::uint64_t lam_cells) {
  MomentSample s;
  s.t = t;
  const double nd = static_cast<double>(st.n());
  CompensatedSum phi, phi2;
  std::uint64_t count = 0, cells = 0;
  for (std::size_t i = 0; i < st.n(); ++i) {
    if (!alive[i]) continue;
    ++count;
    cells += st.cell(i);
    const double p = w(st.omega(i));
    phi.add(p);
    phi2.add(p * p);
  }
  s.alive = count;
  s.cell_sum = cells;
  s.W = static_cast<double>(count) / nd;
  s.E = static_cast<double>(cells) * st.h() / nd;
  s.phi = phi.value() / nd;
  s.phi2 = phi2.value() / nd;
  if (truncated) {
    s.lambda_count = lam_count;
    s.lambda_cells = lam_cells;
    s.Lambda = (static_cast<double>(lam_count) + st.h() * static_cast<double>(lam_cells)) / nd;
  }
  return s;
}

inline DiscreteMeasure alive_measure(const ParticleState& st, const std::vector<bool>& alive) {
  std::vector<Atom> atoms;
  const double inv = 1.0 / static_cast<double>(st.n());
  for (std::size_t i = 0; i < st.n(); ++i) {
    if (alive[i]) atoms.push_back({st.omega(i), inv});
  }
  DiscreteMeasure m(std::move(atoms), st.h());
  m.compact();
  return m;
}

inline std::uint64_t bound_to_cell(double bound, double h) {
  if (!(bound >= 0.0)) throw std::invalid_argument("bound B must be >= 0");
  if (std::isinf(bound)) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(std::floor(bound / h + 1e-9));
}

inline void push_event(Trajectory& traj, const SimOptions& opt, const JumpEvent& ev) {
  if (traj.events.size() >= opt.max_events) {
    throw std::runtime_error("event log overflow: more than " + std::to_string(opt.max_events) +
                             " events recorded (raise max_events or disable the log)");
  }
  traj.events.push_back(ev);
}

[[noreturn]] inline void throw_ratio(double w1, double w2, double w3, double ratio) {
  throw SubmultiplicativityError(
      "acceptance ratio K/(phi phi phi) = " + format_double(ratio) + " > 1 at (" +
          format_double(w1) + ", " + format_double(w2) + ", " + format_double(w3) +
          "): kernel is not sub-multiplicative for this weight",
      w1, w2, w3, ratio);
}

}  // namespace wavekin::detail
