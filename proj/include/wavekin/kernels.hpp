// Model interaction kernels K(w1, w2, w3) and the weight functions used to
// dominate them.
#pragma once

#include <array>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wavekin {

using Triple = std::array<double, 3>;

enum class KernelFamily { Product, Sum, MixedExponent, Constant };

/// Factorisation of K for a fixed leading pair (w1, w2):
///   K(w1, w2, w3) = scale * third_factor(w3) + offset.
/// Every built-in family has this form, which lets the grid scatter stream
/// over w3 with one multiply-add per cell.
struct KernelSlice {
  double scale = 0.0;
  double offset = 0.0;
};

/// Homogeneous model kernel, symmetric in its first two arguments.
///
///   Product(l)        (w1 w2 w3)^(l/3)
///   Sum(l)            (w1^l + w2^l + w3^l) / 3
///   Mixed(p, q, r)    (w1^p w2^q w3^r + w1^q w2^p w3^r) / 2
///   Constant(c)       c
///
/// 0^0 evaluates to 1 so degenerate exponents stay total. Instances are plain
/// values and can be shared freely between threads.
class Kernel {
 public:
  static Kernel product(double lambda);
  static Kernel sum(double lambda);
  static Kernel mixed(double p, double q, double r);
  static Kernel constant(double c);

  KernelFamily family() const noexcept { return family_; }
  double degree() const noexcept;

  double operator()(double w1, double w2, double w3) const noexcept;

  KernelSlice slice(double w1, double w2) const noexcept;
  double third_factor(double w3) const noexcept;

  /// Canonical specification string, e.g. "product:lambda=1".
  std::string spec() const;

  double param(std::size_t i) const noexcept { return params_[i]; }

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  Kernel(KernelFamily f, std::array<double, 3> p) : family_(f), params_(p) {}

  KernelFamily family_;
  std::array<double, 3> params_;
};

enum class WeightKind { Affine, Fractional };

/// phi(w) = w + 1 (Affine) or phi(w) = w^(1 - gamma) (Fractional).
class WeightFunction {
 public:
  static WeightFunction affine() { return WeightFunction(WeightKind::Affine, 0.0); }
  static WeightFunction fractional(double gamma);

  WeightKind kind() const noexcept { return kind_; }
  double gamma() const noexcept { return gamma_; }
  double operator()(double w) const noexcept;
  std::string spec() const;

  friend bool operator==(const WeightFunction&, const WeightFunction&) = default;

 private:
  WeightFunction(WeightKind k, double g) : kind_(k), gamma_(g) {}
  WeightKind kind_;
  double gamma_;
};

/// Raised for malformed kernel / weight specification strings. `field()` names
/// the offending key (or "family"), `position()` is the character offset.
class SpecError : public std::invalid_argument {
 public:
  SpecError(const std::string& msg, std::string field, std::size_t position)
      : std::invalid_argument(msg), field_(std::move(field)), position_(position) {}
  const std::string& field() const noexcept { return field_; }
  std::size_t position() const noexcept { return position_; }

 private:
  std::string field_;
  std::size_t position_;
};

/// Parses `product:lambda=1`, `sum:lambda=2`, `mixed:p=1,q=0,r=0`, `const:c=1`.
Kernel parse_kernel(std::string_view spec);
/// Parses `affine` or `fractional:gamma=0.5`.
WeightFunction parse_weight(std::string_view spec);

using KernelFn = std::function<double(double, double, double)>;

struct CheckReport {
  bool pass = true;
  Triple witness{0.0, 0.0, 0.0};
  double worst = 0.0;  // largest normalised residual (or ratio) seen
  double scale = 1.0;  // homogeneity only: the xi of the worst sample
};

CheckReport check_symmetry(const KernelFn& k, std::span<const Triple> samples);
CheckReport check_homogeneity(const KernelFn& k, double degree, std::span<const Triple> samples,
                              std::span<const double> scales);
CheckReport check_submultiplicative(const KernelFn& k, const WeightFunction& w,
                                    std::span<const Triple> samples);

inline KernelFn as_fn(const Kernel& k) {
  return [k](double a, double b, double c) { return k(a, b, c); };
}

}  // namespace wavekin
