#pragma once

#include <vector>

#include "wavekin/solver.hpp"

namespace wavekin::detail {

std::size_t grid_cells(double h, double bound);

/// Dense weights on cells [0, cells). Atoms beyond the grid throw unless
/// `outside_phi` is given, in which case their phi-mass is summed there.
std::vector<double> to_grid(const DiscreteMeasure& mu, double h, std::size_t cells,
                            double* outside_phi);

struct System {
  System(const Kernel& k, double h, std::size_t cells, Truncation mode);
  void rhs(const std::vector<double>& u, double lam, std::vector<double>& du, double& dlam);
  double conserved(const std::vector<double>& u, double lam) const;
  MomentSample sample(double t, const std::vector<double>& u, double lam) const;

  CollisionGrid grid;
  Truncation mode;
  std::vector<double> phi;
  CollisionGrid::Result res;
};

}  // namespace wavekin::detail
