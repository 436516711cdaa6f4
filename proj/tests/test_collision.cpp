#include <doctest.h>

#include <cmath>
#include <map>

#include "wavekin/collision.hpp"
#include "wavekin/rng.hpp"

using namespace wavekin;

namespace {

// Ordered-triple enumeration, straight from the weak form.
double brute_q(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const DiscreteMeasure& tau,
               const Kernel& k, const TestFn& f) {
  long double s = 0;
  for (const auto& a : mu.atoms())
    for (const auto& b : nu.atoms())
      for (const auto& c : tau.atoms()) {
        if (a.omega + b.omega < c.omega) continue;
        const double br = f(a.omega + b.omega - c.omega) + f(c.omega) - f(a.omega) - f(b.omega);
        s += 0.5L * k(a.omega, b.omega, c.omega) * a.weight * b.weight * c.weight * br;
      }
  return double(s);
}

// Signed grid measure of Q as a cell map, by the same enumeration.
std::map<std::uint64_t, double> brute_q_cells(const std::vector<double>& u, const Kernel& k, double h,
                                              std::size_t out_len, bool drop_escaping) {
  std::map<std::uint64_t, double> q;
  const std::size_t m = u.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t l = 0; l <= std::min(i + j, m - 1); ++l) {
        const std::size_t o = i + j - l;
        if (drop_escaping && o >= out_len) continue;
        const double c = 0.5 * k(i * h, j * h, l * h) * u[i] * u[j] * u[l];
        q[o] += c;
        q[l] += c;
        q[i] -= c;
        q[j] -= c;
      }
  return q;
}

DiscreteMeasure random_measure(Rng& rng, std::size_t atoms, double hi, bool signed_w = false) {
  std::vector<Atom> a;
  for (std::size_t i = 0; i < atoms; ++i) {
    double w = 0.1 + rng.uniform();
    if (signed_w && rng.uniform() < 0.5) w = -w;
    a.push_back({hi * rng.uniform(), w});
  }
  return DiscreteMeasure(a);
}

std::vector<double> random_dense(Rng& rng, std::size_t m, double zero_prob = 0.2) {
  std::vector<double> u(m);
  for (auto& x : u) x = rng.uniform() < zero_prob ? 0.0 : rng.uniform();
  return u;
}

const TestFn one = [](double) { return 1.0; };
const TestFn id = [](double w) { return w; };

}  // namespace

TEST_CASE("single atom gives zero") {
  const auto d = DiscreteMeasure::delta(1.0);
  const TestFn f = [](double w) { return std::exp(-w) + w * w; };
  CHECK(q_pairing(d, Kernel::product(1), f) == 0.0);
  CHECK(q_pairing(d, Kernel::sum(2), f) == 0.0);
  const auto g = DiscreteMeasure::from_dense(std::vector<double>{0, 1}, 1.0);
  CHECK(q_measure(g, Kernel::constant(1)).empty());
}

TEST_CASE("two atoms, constant kernel") {
  const DiscreteMeasure mu({{1, 1}, {3, 1}}, 1.0);
  const TestFn ind = [](double w) { return w >= 4.5 && w <= 5.5 ? 1.0 : 0.0; };
  CHECK(q_pairing(mu, Kernel::constant(1), ind) == 0.5);
  CHECK(brute_q(mu, mu, mu, Kernel::constant(1), ind) == 0.5);
  const auto q = q_measure(mu, Kernel::constant(1));
  double at5 = 0.0;
  for (const auto& a : q.atoms())
    if (a.omega == 5.0) at5 = a.weight;
  CHECK(at5 == 0.5);
}

TEST_CASE("affine test functions are annihilated") {
  Rng rng(11, 0);
  const std::vector<Kernel> ks{Kernel::product(1), Kernel::sum(2), Kernel::mixed(1, 0, 0.5),
                               Kernel::constant(3)};
  for (int trial = 0; trial < 100; ++trial) {
    const auto mu = random_measure(rng, 1 + rng.below(30), 10);
    const auto& k = ks[trial % ks.size()];
    double scale = 0.0;
    for (const auto& a : mu.atoms())
      for (const auto& b : mu.atoms())
        for (const auto& c : mu.atoms())
          scale += 0.5 * k(a.omega, b.omega, c.omega) * a.weight * b.weight * c.weight * (1 + a.omega + b.omega + c.omega);
    CHECK(std::abs(q_pairing(mu, k, one)) <= 1e-12 * scale);
    CHECK(std::abs(q_pairing(mu, k, id)) <= 1e-12 * scale);
  }
}

TEST_CASE("q_pairing matches the enumeration oracle") {
  Rng rng(12, 0);
  const TestFn f = [](double w) { return std::cos(w) + 0.1 * w * w; };
  for (int trial = 0; trial < 20; ++trial) {
    const auto mu = random_measure(rng, 1 + rng.below(20), 5, trial % 2 == 1);
    const auto k = Kernel::product(0.5 + trial % 3);
    const double want = brute_q(mu, mu, mu, k, f);
    CHECK(q_pairing(mu, k, f) == doctest::Approx(want).epsilon(1e-11).scale(1.0));
  }
}

TEST_CASE("q_measure pairs like q_pairing, conserves mass and energy") {
  Rng rng(13, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = random_dense(rng, 12);
    const auto mu = DiscreteMeasure::from_dense(u, 0.25);
    const auto k = Kernel::sum(1.5);
    const auto q = q_measure(mu, k);
    REQUIRE(q.is_grid());
    const TestFn f = [](double w) { return std::sin(3 * w); };
    CHECK(moment(q, f) == doctest::Approx(q_pairing(mu, k, f)).epsilon(1e-12).scale(1.0));
    CHECK(std::abs(q.mass()) <= 1e-12);
    CHECK(std::abs(moment(q, id)) <= 1e-12);
    const auto oracle = brute_q_cells(u, k, 0.25, 2 * u.size(), false);
    for (std::size_t i = 0; i < q.size(); ++i) {
      CHECK(q.atoms()[i].weight == doctest::Approx(oracle.at(q.cell(i))).epsilon(1e-12).scale(1.0));
    }
  }
  CHECK_THROWS_AS(q_measure(DiscreteMeasure::delta(0.3), Kernel::constant(1)), std::invalid_argument);
}

TEST_CASE("counting correction examples") {
  // two particles at 1
  const DiscreteMeasure x({{1, 1.0}}, 1.0);
  const TestFn f = [](double w) { return w * w * w; };
  CHECK(q_counting(x, Kernel::product(1), f, 2) == 0.0);

  // mu^(n)({1}x{1}x{1}) for X = 1/2 (delta_1 + delta_2), n = 2
  const double X1 = 0.5;
  CHECK(X1 * X1 * X1 - 0.5 * X1 * X1 == 0.0);

  CHECK_THROWS_AS(q_counting(DiscreteMeasure({{1, 0.3}, {2, 0.7}}, 1.0), Kernel::constant(1), f, 2),
                  std::invalid_argument);
}

TEST_CASE("q_counting against the particle enumeration") {
  // (1/n^3) sum over ordered i != j and all l of 1/2 K bracket
  Rng rng(14, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + rng.below(10);
    std::vector<std::uint64_t> cells(n);
    for (auto& c : cells) c = rng.below(6);
    const double h = 0.5;
    const auto k = Kernel::product(1);
    const TestFn f = [](double w) { return std::exp(-w); };
    long double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        for (std::size_t l = 0; l < n; ++l) {
          const double a = cells[i] * h, b = cells[j] * h, c = cells[l] * h;
          if (a + b < c) continue;
          s += 0.5L * k(a, b, c) * (f(a + b - c) + f(c) - f(a) - f(b));
        }
      }
    const double want = double(s / (long double)(n * n * n));
    std::vector<double> w(n, 1.0 / double(n));
    const auto xm = DiscreteMeasure::from_cells(cells, w, h);
    CHECK(q_counting(xm, k, f, n) == doctest::Approx(want).epsilon(1e-12).scale(1.0));
    const double diag = q_counting_diagonal(xm, k, f, n);
    CHECK(q_pairing(xm, k, f) - q_counting(xm, k, f, n) == doctest::Approx(diag).epsilon(1e-12).scale(1.0));
    // explicit bound (2 / n) ||f|| sup K ||X||^2 with ||X|| = 1
    double supk = 0.0;
    for (auto a : cells)
      for (auto c : cells) supk = std::max(supk, k(a * h, a * h, c * h));
    CHECK(std::abs(diag) <= 2.0 / double(n) * 1.0 * supk);
  }
}

TEST_CASE("trilinear form") {
  Rng rng(15, 0);
  const auto k = Kernel::mixed(1, 0.5, 0.5);
  const TestFn f = [](double w) { return 1.0 / (1.0 + w * w); };
  bool witness = false;
  for (int trial = 0; trial < 100; ++trial) {
    const auto mu = random_measure(rng, 1 + rng.below(8), 4);
    const auto nu = random_measure(rng, 1 + rng.below(8), 4);
    const auto tau = random_measure(rng, 1 + rng.below(8), 4, true);
    CHECK(trilinear_pairing(mu, nu, tau, k, f) ==
          doctest::Approx(trilinear_pairing(nu, mu, tau, k, f)).epsilon(1e-12).scale(1.0));
    CHECK(trilinear_pairing(mu, nu, tau, k, f) ==
          doctest::Approx(brute_q(mu, nu, tau, k, f)).epsilon(1e-12).scale(1.0));
    if (std::abs(trilinear_pairing(mu, nu, tau, k, f) - trilinear_pairing(mu, tau, nu, k, f)) > 1e-6) witness = true;

    // Q(mu) - Q(nu) = Q(mu+nu, mu-nu, mu) + Q(mu+nu, nu, mu-nu) + Q(mu, nu, nu-mu)
    const double lhs = q_pairing(mu, k, f) - q_pairing(nu, k, f);
    const double rhs = trilinear_pairing(mu + nu, mu - nu, mu, k, f) +
                       trilinear_pairing(mu + nu, nu, mu - nu, k, f) +
                       trilinear_pairing(mu, nu, nu - mu, k, f);
    const double scale = std::pow(tv_norm(mu) + tv_norm(nu), 3.0) * 16.0;  // |K| <= 16 on [0, 4]^3
    CHECK(std::abs(lhs - rhs) <= 1e-13 * scale);
  }
  CHECK(witness);
}

TEST_CASE("product kernel closed form") {
  Rng rng(16, 0);
  for (int trial = 0; trial < 20; ++trial) {
    // atoms in [1, 2] keep every triple inside D
    std::vector<Atom> at;
    for (int i = 0; i < 6; ++i) at.push_back({1.0 + rng.uniform(), rng.uniform()});
    const DiscreteMeasure mu(at);
    const double lambda = 3.0 * rng.uniform();
    const std::vector<double> c{0.3, -1.0, 0.7, 0.2};
    const TestFn p = [&](double w) { return c[0] + c[1] * w + c[2] * w * w + c[3] * w * w * w; };
    CHECK(q_pairing_product_poly(mu, lambda, c) ==
          doctest::Approx(q_pairing(mu, Kernel::product(lambda), p)).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("truncated generator pairing") {
  Rng rng(17, 0);
  const auto k = Kernel::product(1);
  const TestFn phi = [](double w) { return w + 1.0; };
  for (int trial = 0; trial < 20; ++trial) {
    const auto mu = random_measure(rng, 1 + rng.below(10), 2);
    TruncatedState s{mu, 0.5 * rng.uniform(), 2.0 + rng.uniform()};
    const auto cons = l_b_pairing(s, k, phi, 1.0);
    CHECK(std::abs(cons.total()) <= 1e-12 * (1.0 + std::abs(cons.measure_part)));

    const auto lam_rate = l_b_pairing(s, k, [](double) { return 0.0; }, 1.0);
    CHECK(lam_rate.measure_part == 0.0);
    CHECK(lam_rate.overflow_part >= 0.0);

    const TestFn f = [](double w) { return std::sin(w); };
    TruncatedState wide{mu, 0.0, 10.0};
    const auto p = l_b_pairing(wide, k, f, 0.0);
    CHECK(p.overflow_part == 0.0);
    CHECK(p.measure_part == doctest::Approx(q_pairing(mu, k, f)).epsilon(1e-12).scale(1.0));
  }
  TruncatedState bad{DiscreteMeasure::delta(5.0), 0.0, 1.0};
  CHECK_THROWS(l_b_pairing(bad, k, phi, 1.0));
}

TEST_CASE("grid scatter matches the enumeration") {
  Rng rng(18, 0);
  const double h = 0.125;
  for (const auto& k : {Kernel::product(1), Kernel::sum(2), Kernel::mixed(0.5, 1, 0), Kernel::constant(1)}) {
    CAPTURE(k.spec());
    for (std::size_t m : {1u, 2u, 7u, 16u}) {
      const auto u = random_dense(rng, m);
      const CollisionGrid grid(k, h, m);
      for (std::size_t out_len : {m, m + (m - 1) / 2, 2 * m - 1}) {
        for (auto mode : {Truncation::Overflow, Truncation::Conservative}) {
          const bool drop = mode == Truncation::Conservative;
          const auto oracle = brute_q_cells(u, k, h, out_len, drop);
          CollisionGrid::Result r;
          grid.scatter(u, out_len, mode, r);
          REQUIRE(r.gain.size() == out_len);
          REQUIRE(r.loss.size() == m);
          double ov_mass = 0.0, ov_phi = 0.0;
          for (const auto& [c, v] : oracle) {
            if (c >= out_len) {
              ov_mass += v;
              ov_phi += v * (1.0 + c * h);
              continue;
            }
            const double got = r.gain[c] - (c < m ? r.loss[c] : 0.0);
            CHECK(got == doctest::Approx(v).epsilon(1e-12).scale(1.0));
          }
          if (drop) {
            CHECK(r.overflow_mass == 0.0);
          } else {
            CHECK(r.overflow_mass == doctest::Approx(ov_mass).epsilon(1e-12).scale(1.0));
            CHECK(r.overflow_phi == doctest::Approx(ov_phi).epsilon(1e-12).scale(1.0));
          }
          const auto rho = grid.loss_rate(u, out_len, mode);
          for (std::size_t c = 0; c < m; ++c) {
            CHECK(rho[c] * u[c] == doctest::Approx(r.loss[c]).epsilon(1e-12).scale(1.0));
          }
        }
      }
    }
  }
  const CollisionGrid g(Kernel::constant(1), h, 4);
  CollisionGrid::Result r;
  CHECK_THROWS(g.scatter(std::vector<double>(4, 1.0), 3, Truncation::Overflow, r));
  CHECK_THROWS(g.scatter(std::vector<double>(4, 1.0), 8, Truncation::Overflow, r));
  CHECK_THROWS(g.scatter(std::vector<double>(3, 1.0), 4, Truncation::Overflow, r));
}

TEST_CASE("collision norm constant") {
  const double h = 0.25;
  const std::size_t m = 9;
  const auto k = Kernel::sum(1);
  double want = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t l = 0; l <= std::min(i + j, m - 1); ++l) {
        const std::size_t o = i + j - l;
        const double out_term = o < m ? 1.0 : 1.0 + o * h;
        want = std::max(want, 0.5 * k(i * h, j * h, l * h) * (3.0 + out_term));
      }
  CHECK(CollisionGrid(k, h, m).collision_norm_constant() == doctest::Approx(want).epsilon(1e-14));
}
