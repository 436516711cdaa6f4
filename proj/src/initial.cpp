#include "wavekin/initial.hpp"

#include <cmath>

#include "spec_parse.hpp"

namespace wavekin {

InitialSpec parse_initial(std::string_view spec) {
  InitialSpec out;
  if (spec.substr(0, 5) == "file:") {
    out.kind = InitialSpec::Kind::File;
    out.path = std::string(spec.substr(5));
    if (out.path.empty()) throw SpecError("file: needs a path", "path", 5);
    return out;
  }
  auto p = detail::split_spec(spec);
  const auto n = spec.size();
  if (p.family == "exp") {
    out.kind = InitialSpec::Kind::Exponential;
    out.mean = detail::take(p, "mean", n);
    if (!(out.mean > 0.0)) throw SpecError("parameter 'mean' must be > 0", "mean", n);
    if (p.params.contains("cells")) {
      const double c = detail::take(p, "cells", n);
      if (c < 1.0 || c != std::floor(c)) throw SpecError("parameter 'cells' must be a positive integer", "cells", n);
      out.cells = static_cast<std::size_t>(c);
    }
  } else if (p.family == "delta") {
    out.kind = InitialSpec::Kind::Delta;
    out.w = detail::take(p, "w", n);
    if (!(out.w >= 0.0)) throw SpecError("parameter 'w' must be >= 0", "w", n);
  } else if (p.family == "two") {
    out.kind = InitialSpec::Kind::Two;
    out.w1 = detail::take(p, "w1", n);
    out.w2 = detail::take(p, "w2", n);
    if (p.params.contains("p")) out.p = detail::take(p, "p", n);
    if (!(out.w1 >= 0.0)) throw SpecError("parameter 'w1' must be >= 0", "w1", n);
    if (!(out.w2 >= 0.0)) throw SpecError("parameter 'w2' must be >= 0", "w2", n);
    if (!(out.p >= 0.0 && out.p <= 1.0)) throw SpecError("parameter 'p' must lie in [0, 1]", "p", n);
  } else {
    throw SpecError("unknown initial data '" + p.family + "' (expected exp, delta, two, file)",
                    "family", 0);
  }
  detail::reject_leftovers(p);
  return out;
}

DiscreteMeasure initial_measure(const InitialSpec& spec, double h, std::size_t grid_cells) {
  switch (spec.kind) {
    case InitialSpec::Kind::Exponential:
      return quantized_exponential(spec.mean, h, spec.cells.value_or(grid_cells));
    case InitialSpec::Kind::Delta:
      return DiscreteMeasure({{spec.w, 1.0}}, h);
    case InitialSpec::Kind::Two: {
      DiscreteMeasure m({{spec.w1, spec.p}, {spec.w2, 1.0 - spec.p}}, h);
      m.compact();
      return m;
    }
    case InitialSpec::Kind::File: {
      auto m = read_measure_csv(spec.path);
      const double mass = m.mass();
      if (!(mass > 0.0)) throw std::invalid_argument("initial measure in '" + spec.path + "' has no mass");
      return DiscreteMeasure(m.scaled(1.0 / mass).atoms(), h);
    }
  }
  throw std::logic_error("initial_measure: bad kind");
}

ParticleState initial_particles(const InitialSpec& spec, std::size_t n, double h, Rng& rng) {
  if (spec.kind == InitialSpec::Kind::Exponential && !spec.cells) {
    return init_exponential(n, spec.mean, h, rng);
  }
  return init(n, initial_measure(spec, h, spec.cells.value_or(1)), h, rng);
}

}  // namespace wavekin
