// Binary indexed tree over nonnegative weights with O(log n) point update and
// inverse-CDF sampling.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace wavekin {

class Fenwick {
 public:
  Fenwick() = default;
  explicit Fenwick(const std::vector<double>& w) { assign(w); }

  void assign(const std::vector<double>& w) {
    n_ = w.size();
    value_ = w;
    tree_.assign(n_ + 1, 0.0);
    for (std::size_t i = 1; i <= n_; ++i) {
      tree_[i] += w[i - 1];
      const std::size_t p = i + (i & (~i + 1));
      if (p <= n_) tree_[p] += tree_[i];
    }
    top_ = 1;
    while (top_ * 2 <= n_) top_ *= 2;
  }

  std::size_t size() const noexcept { return n_; }
  double weight(std::size_t i) const { return value_[i]; }

  void set(std::size_t i, double w) {
    const double delta = w - value_[i];
    value_[i] = w;
    for (std::size_t p = i + 1; p <= n_; p += p & (~p + 1)) tree_[p] += delta;
  }

  /// Sum of weights [0, i).
  double prefix(std::size_t i) const {
    double s = 0.0;
    for (std::size_t p = i; p > 0; p -= p & (~p + 1)) s += tree_[p];
    return s;
  }

  double total() const { return prefix(n_); }

  /// Smallest index i with prefix(i + 1) > target, for target in [0, total()).
  /// Returns size() when rounding pushes the target past the last entry.
  std::size_t find(double target) const {
    std::size_t pos = 0;
    for (std::size_t step = top_; step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next <= n_ && tree_[next] <= target) {
        target -= tree_[next];
        pos = next;
      }
    }
    return pos;
  }

 private:
  std::size_t n_ = 0;
  std::size_t top_ = 0;
  std::vector<double> value_;
  std::vector<double> tree_;
};

}  // namespace wavekin
