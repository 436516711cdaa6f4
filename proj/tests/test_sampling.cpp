#include <doctest.h>

#include <cmath>
#include <vector>

#include "wavekin/fenwick.hpp"
#include "wavekin/parallel.hpp"
#include "wavekin/rng.hpp"

using namespace wavekin;

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  bool differ_c = false, differ_d = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differ_c |= x != c.next();
    differ_d |= x != d.next();
  }
  CHECK(differ_c);
  CHECK(differ_d);
}

TEST_CASE("rng conversions") {
  Rng r(1, 0);
  double sum = 0, sum_e = 0;
  const int n = 200000;
  std::vector<int> hist(7, 0);
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    const double up = r.uniform_pos();
    REQUIRE(up > 0.0);
    REQUIRE(up <= 1.0);
    sum_e += r.exponential();
    ++hist[r.below(7)];
  }
  CHECK(std::abs(sum / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(sum_e / n - 1.0) < 5 * std::sqrt(1.0 / n));
  for (int h : hist) CHECK(std::abs(h - n / 7.0) < 5 * std::sqrt(n / 7.0));
}

TEST_CASE("fenwick prefix sums and updates") {
  Rng rng(2, 0);
  std::vector<double> w(37);
  for (auto& x : w) x = rng.uniform();
  Fenwick f(w);
  for (int step = 0; step < 500; ++step) {
    const std::size_t i = rng.below(w.size());
    w[i] = rng.uniform() < 0.1 ? 0.0 : rng.uniform() * 4;
    f.set(i, w[i]);
    const std::size_t k = rng.below(w.size() + 1);
    double want = 0;
    for (std::size_t j = 0; j < k; ++j) want += w[j];
    CHECK(f.prefix(k) == doctest::Approx(want).epsilon(1e-12));
    CHECK(f.weight(i) == w[i]);
  }
}

TEST_CASE("fenwick find is the inverse cdf") {
  Rng rng(3, 0);
  for (std::size_t n : {1u, 2u, 3u, 8u, 13u, 64u, 100u}) {
    std::vector<double> w(n);
    for (auto& x : w) x = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
    w[rng.below(n)] = 1.0;
    const Fenwick f(w);
    for (int q = 0; q < 200; ++q) {
      const double t = rng.uniform() * f.total();
      // linear scan oracle
      std::size_t want = 0;
      double acc = 0;
      while (want < n && acc + w[want] <= t) acc += w[want++];
      CHECK(f.find(t) == want);
      if (want < n) CHECK(w[want] > 0.0);
    }
  }
}

TEST_CASE("fenwick sampling frequencies") {
  const std::vector<double> w{1, 0, 2, 3, 0, 4};
  const Fenwick f(w);
  Rng rng(4, 0);
  std::vector<int> hist(w.size(), 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++hist[f.find(rng.uniform() * f.total())];
  CHECK(hist[1] == 0);
  CHECK(hist[4] == 0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double p = w[i] / 10.0;
    CHECK(std::abs(hist[i] - n * p) <= 5 * std::sqrt(n * p * (1 - p)) + 1e-9);
  }
}

TEST_CASE("parallel_for writes by index and rethrows") {
  std::vector<int> out(100, 0);
  parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = int(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == int(i * i));
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 5) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}
