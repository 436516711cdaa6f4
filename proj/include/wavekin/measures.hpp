// Purely atomic (signed) measures on R_+ and the functionals used on them.
#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavekin/kernels.hpp"

namespace wavekin {

struct Atom {
  double omega = 0.0;
  double weight = 0.0;
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite list of (position, weight) pairs. Weights may be negative (signed
/// measures appear as Picard differences and collision outputs).
///
/// Grid mode: positions are integer multiples c * h of the resolution h, with
/// the integer c recoverable through `cell()`. Positions are always stored as
/// c * h computed in double, so the same cell maps to the same bits.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::vector<Atom> atoms, std::optional<double> h = std::nullopt);

  static DiscreteMeasure delta(double omega, double weight = 1.0);
  /// Grid measure from integer cells and weights (same length).
  static DiscreteMeasure from_cells(std::span<const std::uint64_t> cells,
                                    std::span<const double> weights, double h);
  /// Dense grid vector: weight u[c] at position c * h, zeros dropped.
  static DiscreteMeasure from_dense(std::span<const double> u, double h);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }
  std::optional<double> resolution() const noexcept { return h_; }
  bool is_grid() const noexcept { return h_.has_value(); }

  /// Integer cell of atom i. Requires grid mode.
  std::uint64_t cell(std::size_t i) const;
  std::uint64_t max_cell() const;
  /// Dense weights on cells [0, len). Atoms beyond len are an error.
  std::vector<double> to_dense(std::size_t len) const;

  double mass() const noexcept;
  bool is_nonnegative() const noexcept;

  /// Sorts by position, merges atoms at bit-identical positions and drops
  /// zero weights.
  DiscreteMeasure& compact();

  DiscreteMeasure scaled(double c) const;
  friend DiscreteMeasure operator+(const DiscreteMeasure& a, const DiscreteMeasure& b);
  friend DiscreteMeasure operator-(const DiscreteMeasure& a, const DiscreteMeasure& b);

 private:
  std::vector<Atom> atoms_;
  std::optional<double> h_;
};

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      c_ += (sum_ - t) + x;
    } else {
      c_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

/// <f, mu> with compensated summation.
template <class F>
double moment(const DiscreteMeasure& mu, F&& f) {
  CompensatedSum s;
  for (const auto& a : mu.atoms()) s.add(f(a.omega) * a.weight);
  return s.value();
}

/// W = <1, mu>, E = <w, mu>, phi = <phi, mu>, phi2 = <phi^2, mu>.
struct MomentSet {
  double W = 0.0;
  double E = 0.0;
  double phi = 0.0;
  double phi2 = 0.0;
};

MomentSet moments(const DiscreteMeasure& mu, const WeightFunction& w = WeightFunction::affine());

double tv_norm(const DiscreteMeasure& mu);

/// Number of frequencies in the weak-metric test family.
inline constexpr std::size_t kWeakFrequencies = 64;
/// a_k = (k + 1) / 8, k = 0 .. 63.
inline constexpr double weak_frequency(std::size_t k) { return static_cast<double>(k + 1) / 8.0; }

/// d(mu, nu) = sum_k 2^-(k+1) * ( |<cos(a_k .), mu - nu>| + |<sin(a_k .), mu - nu>| ) / 2
/// with a_k = (k + 1) / 8 for k = 0 .. 63. Every test function is bounded by
/// one and the weights sum to less than one, so d <= tv_norm(mu - nu). The
/// series is truncated after k = 63; the omitted tail is at most
/// 2^-64 * (|mu| + |nu|).
double weak_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Moves every atom to the nearest multiple of h (ties to the even multiple).
DiscreteMeasure quantize(const DiscreteMeasure& mu, double h);

/// Exp(mean) pushed to the nearest grid cell and conditioned on the first
/// `cells` cells (renormalised to mass one).
DiscreteMeasure quantized_exponential(double mean, double h, std::size_t cells);

/// Multiplies each weight by w(omega); atoms where w vanishes are dropped.
DiscreteMeasure phi_transform(const DiscreteMeasure& mu, const WeightFunction& w);

/// CSV with header `omega,weight`, ascending positions, 17 significant
/// digits. Grid measures carry a leading `# h=<value>` line.
void write_measure_csv(std::ostream& os, const DiscreteMeasure& mu);
DiscreteMeasure read_measure_csv(std::istream& is);
void write_measure_csv(const std::string& path, const DiscreteMeasure& mu);
DiscreteMeasure read_measure_csv(const std::string& path);

/// Formats a double with 17 significant digits (round-trip safe).
std::string format_double(double v);

}  // namespace wavekin
