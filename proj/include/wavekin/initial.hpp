// Initial data specifications for the CLI and the experiment drivers:
//   exp:mean=1            Exp(mean); particles sample it continuously, the
//                         solver uses it quantized and conditioned on the grid
//   exp:mean=1,cells=64   same, conditioned on the first 64 cells everywhere
//   delta:w=1             a unit atom at w
//   two:w1=1,w2=2,p=0.5   p delta_w1 + (1 - p) delta_w2
//   file:PATH             a measure CSV
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "wavekin/measures.hpp"
#include "wavekin/particle.hpp"
#include "wavekin/rng.hpp"

namespace wavekin {

struct InitialSpec {
  enum class Kind { Exponential, Delta, Two, File };
  Kind kind = Kind::Exponential;
  double mean = 1.0;
  double w = 1.0;
  double w1 = 1.0, w2 = 2.0, p = 0.5;
  std::optional<std::size_t> cells;
  std::string path;
};

/// Throws SpecError on malformed input.
InitialSpec parse_initial(std::string_view spec);

/// Discrete probability measure on the grid h * {0, .., grid_cells - 1}.
/// Atoms of delta/two/file data must be grid points.
DiscreteMeasure initial_measure(const InitialSpec& spec, double h, std::size_t grid_cells);

/// n particles drawn i.i.d. from the initial law and rounded to the grid.
ParticleState initial_particles(const InitialSpec& spec, std::size_t n, double h, Rng& rng);

}  // namespace wavekin
