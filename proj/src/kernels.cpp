#include "wavekin/kernels.hpp"

#include <charconv>
#include <limits>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "spec_parse.hpp"

namespace wavekin {

using detail::fmt_num;
using detail::ParsedSpec;
using detail::reject_leftovers;
using detail::require_nonneg;
using detail::split_spec;
using detail::take;

Kernel Kernel::product(double lambda) {
  require_nonneg(lambda, "lambda", 0);
  return Kernel(KernelFamily::Product, {lambda, 0.0, 0.0});
}

Kernel Kernel::sum(double lambda) {
  require_nonneg(lambda, "lambda", 0);
  return Kernel(KernelFamily::Sum, {lambda, 0.0, 0.0});
}

Kernel Kernel::mixed(double p, double q, double r) {
  require_nonneg(p, "p", 0);
  require_nonneg(q, "q", 0);
  require_nonneg(r, "r", 0);
  return Kernel(KernelFamily::MixedExponent, {p, q, r});
}

Kernel Kernel::constant(double c) {
  require_nonneg(c, "c", 0);
  return Kernel(KernelFamily::Constant, {c, 0.0, 0.0});
}

double Kernel::degree() const noexcept {
  switch (family_) {
    case KernelFamily::Product:
    case KernelFamily::Sum: return params_[0];
    case KernelFamily::MixedExponent: return params_[0] + params_[1] + params_[2];
    case KernelFamily::Constant: return 0.0;
  }
  return 0.0;
}

double Kernel::operator()(double w1, double w2, double w3) const noexcept {
  switch (family_) {
    case KernelFamily::Product: return std::pow(w1 * w2 * w3, params_[0] / 3.0);
    case KernelFamily::Sum: {
      const double l = params_[0];
      return (std::pow(w1, l) + std::pow(w2, l) + std::pow(w3, l)) / 3.0;
    }
    case KernelFamily::MixedExponent: {
      const auto [p, q, r] = params_;
      const double c = std::pow(w3, r);
      return 0.5 * (std::pow(w1, p) * std::pow(w2, q) * c + std::pow(w1, q) * std::pow(w2, p) * c);
    }
    case KernelFamily::Constant: return params_[0];
  }
  return 0.0;
}

KernelSlice Kernel::slice(double w1, double w2) const noexcept {
  switch (family_) {
    case KernelFamily::Product: {
      const double e = params_[0] / 3.0;
      return {std::pow(w1, e) * std::pow(w2, e), 0.0};
    }
    case KernelFamily::Sum: {
      const double l = params_[0];
      return {1.0 / 3.0, (std::pow(w1, l) + std::pow(w2, l)) / 3.0};
    }
    case KernelFamily::MixedExponent: {
      const auto [p, q, r] = params_;
      return {0.5 * (std::pow(w1, p) * std::pow(w2, q) + std::pow(w1, q) * std::pow(w2, p)), 0.0};
    }
    case KernelFamily::Constant: return {0.0, params_[0]};
  }
  return {};
}

double Kernel::third_factor(double w3) const noexcept {
  switch (family_) {
    case KernelFamily::Product: return std::pow(w3, params_[0] / 3.0);
    case KernelFamily::Sum: return std::pow(w3, params_[0]);
    case KernelFamily::MixedExponent: return std::pow(w3, params_[2]);
    case KernelFamily::Constant: return 1.0;
  }
  return 0.0;
}

std::string Kernel::spec() const {
  switch (family_) {
    case KernelFamily::Product: return "product:lambda=" + fmt_num(params_[0]);
    case KernelFamily::Sum: return "sum:lambda=" + fmt_num(params_[0]);
    case KernelFamily::MixedExponent:
      return "mixed:p=" + fmt_num(params_[0]) + ",q=" + fmt_num(params_[1]) +
             ",r=" + fmt_num(params_[2]);
    case KernelFamily::Constant: return "const:c=" + fmt_num(params_[0]);
  }
  return {};
}

WeightFunction WeightFunction::fractional(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw SpecError("parameter 'gamma' must lie in (0, 1), got " + fmt_num(gamma), "gamma", 0);
  }
  return WeightFunction(WeightKind::Fractional, gamma);
}

double WeightFunction::operator()(double w) const noexcept {
  if (kind_ == WeightKind::Affine) return w + 1.0;
  return w == 0.0 ? 0.0 : std::pow(w, 1.0 - gamma_);
}

std::string WeightFunction::spec() const {
  if (kind_ == WeightKind::Affine) return "affine";
  return "fractional:gamma=" + fmt_num(gamma_);
}

Kernel parse_kernel(std::string_view spec) {
  auto p = split_spec(spec);
  const auto n = spec.size();
  Kernel k = Kernel::constant(0.0);
  if (p.family == "product") {
    k = Kernel::product(take(p, "lambda", n));
  } else if (p.family == "sum") {
    k = Kernel::sum(take(p, "lambda", n));
  } else if (p.family == "mixed") {
    const double a = take(p, "p", n);
    const double b = take(p, "q", n);
    const double c = take(p, "r", n);
    k = Kernel::mixed(a, b, c);
  } else if (p.family == "const") {
    k = Kernel::constant(take(p, "c", n));
  } else {
    throw SpecError("unknown kernel family '" + p.family + "' (expected product, sum, mixed, const)",
                    "family", 0);
  }
  reject_leftovers(p);
  return k;
}

WeightFunction parse_weight(std::string_view spec) {
  auto p = split_spec(spec);
  if (p.family == "affine") {
    reject_leftovers(p);
    return WeightFunction::affine();
  }
  if (p.family == "fractional") {
    auto it = p.params.find("gamma");
    if (it == p.params.end()) throw SpecError("missing parameter 'gamma'", "gamma", spec.size());
    const double g = it->second.first;
    const std::size_t pos = it->second.second;
    p.params.erase(it);
    reject_leftovers(p);
    if (!(g > 0.0 && g < 1.0)) {
      throw SpecError("parameter 'gamma' must lie in (0, 1), got " + fmt_num(g), "gamma", pos);
    }
    return WeightFunction::fractional(g);
  }
  throw SpecError("unknown weight '" + p.family + "' (expected affine, fractional)", "family", 0);
}

CheckReport check_symmetry(const KernelFn& k, std::span<const Triple> samples) {
  CheckReport r;
  for (const auto& s : samples) {
    const double a = k(s[0], s[1], s[2]);
    const double b = k(s[1], s[0], s[2]);
    const double res = std::abs(a - b) / (1.0 + std::abs(a));
    if (res > r.worst || !std::isfinite(res)) {
      r.worst = res;
      r.witness = s;
    }
    if (!(res <= 1e-12)) r.pass = false;
  }
  return r;
}

CheckReport check_homogeneity(const KernelFn& k, double degree, std::span<const Triple> samples,
                              std::span<const double> scales) {
  CheckReport r;
  for (const double xi : scales) {
    const double f = std::pow(xi, degree);
    for (const auto& s : samples) {
      const double base = k(s[0], s[1], s[2]);
      const double scaled = k(xi * s[0], xi * s[1], xi * s[2]);
      const double res = std::abs(scaled - f * base) / (f * (1.0 + base));
      if (res > r.worst || !std::isfinite(res)) {
        r.worst = res;
        r.witness = s;
        r.scale = xi;
      }
      if (!(res <= 1e-10)) r.pass = false;
    }
  }
  return r;
}

CheckReport check_submultiplicative(const KernelFn& k, const WeightFunction& w,
                                    std::span<const Triple> samples) {
  CheckReport r;
  for (const auto& s : samples) {
    const double kv = k(s[0], s[1], s[2]);
    const double bound = w(s[0]) * w(s[1]) * w(s[2]);
    const bool ok = kv <= bound * (1.0 + 1e-12);
    double ratio = 0.0;
    if (bound > 0.0) {
      ratio = kv / bound;
    } else if (kv > 0.0) {
      ratio = std::numeric_limits<double>::infinity();
    }
    if (ratio > r.worst || (!ok && r.pass)) {
      r.worst = ratio;
      r.witness = s;
    }
    if (!ok) r.pass = false;
  }
  return r;
}

}  // namespace wavekin
