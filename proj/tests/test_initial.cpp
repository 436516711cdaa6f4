#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "wavekin/initial.hpp"

using namespace wavekin;

TEST_CASE("initial spec parsing") {
  auto e = parse_initial("exp:mean=2");
  CHECK(e.kind == InitialSpec::Kind::Exponential);
  CHECK(e.mean == 2.0);
  CHECK_FALSE(e.cells.has_value());
  CHECK(*parse_initial("exp:mean=1,cells=64").cells == 64);

  auto d = parse_initial("delta:w=0.75");
  CHECK(d.kind == InitialSpec::Kind::Delta);
  CHECK(d.w == 0.75);

  auto t = parse_initial("two:w1=0.25,w2=0.5");
  CHECK(t.kind == InitialSpec::Kind::Two);
  CHECK(t.p == 0.5);
  CHECK(parse_initial("two:w1=0.25,w2=0.5,p=0.2").p == 0.2);

  auto f = parse_initial("file:some/dir/mu.csv");
  CHECK(f.kind == InitialSpec::Kind::File);
  CHECK(f.path == "some/dir/mu.csv");
}

TEST_CASE("initial spec errors name the field") {
  auto field_of = [](const char* s) {
    try {
      parse_initial(s);
    } catch (const SpecError& e) {
      return e.field();
    }
    return std::string("none");
  };
  CHECK(field_of("gauss:s=1") == "family");
  CHECK(field_of("exp:mean=0") == "mean");
  CHECK(field_of("exp:mean=1,cells=2.5") == "cells");
  CHECK(field_of("exp") == "mean");
  CHECK(field_of("delta:w=-1") == "w");
  CHECK(field_of("two:w1=1,w2=2,p=1.5") == "p");
  CHECK(field_of("two:w1=1,w2=2,p=-0.1") == "p");
  CHECK(field_of("delta:w=1,v=2") != "none");
  CHECK(field_of("file:") == "path");
}

TEST_CASE("initial measures") {
  const double h = 0.25;
  const auto e = initial_measure(parse_initial("exp:mean=1"), h, 32);
  CHECK(e.mass() == doctest::Approx(1.0));
  CHECK(e.max_cell() <= 31);
  const auto e8 = initial_measure(parse_initial("exp:mean=1,cells=8"), h, 32);
  CHECK(e8.max_cell() <= 7);

  const auto d = initial_measure(parse_initial("delta:w=0.75"), h, 8);
  REQUIRE(d.size() == 1);
  CHECK(d.cell(0) == 3);

  const auto t = initial_measure(parse_initial("two:w1=0.25,w2=0.5,p=0.3"), h, 8);
  REQUIRE(t.size() == 2);
  CHECK(t.atoms()[0].weight == doctest::Approx(0.3));
  CHECK(t.atoms()[1].weight == doctest::Approx(0.7));
  CHECK(initial_measure(parse_initial("two:w1=0.5,w2=0.5"), h, 8).size() == 1);

  CHECK_THROWS(initial_measure(parse_initial("delta:w=0.3"), h, 8));

  const auto dir = std::filesystem::temp_directory_path() / "wavekin_initial_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "mu.csv").string();
  write_measure_csv(path, DiscreteMeasure({{0.25, 2.0}, {1.0, 6.0}}, h));
  const auto m = initial_measure(parse_initial("file:" + path), h, 8);
  CHECK(m.mass() == doctest::Approx(1.0));
  CHECK(m.atoms()[1].weight == doctest::Approx(0.75));
  CHECK_THROWS(initial_measure(parse_initial("file:" + (dir / "missing.csv").string()), h, 8));
  std::filesystem::remove_all(dir);
}

TEST_CASE("initial particles") {
  const double h = 0.25;
  Rng a(5, 0), b(5, 0);
  const auto pa = initial_particles(parse_initial("exp:mean=1"), 500, h, a);
  const auto pb = initial_particles(parse_initial("exp:mean=1"), 500, h, b);
  CHECK(pa == pb);
  CHECK(pa.n() == 500);
  const double mean = double(pa.cell_sum()) * h / 500;
  CHECK(mean == doctest::Approx(1.0).epsilon(0.2));

  Rng c(6, 0);
  const auto pd = initial_particles(parse_initial("delta:w=0.5"), 10, h, c);
  for (auto cell : pd.cells()) CHECK(cell == 2);

  Rng d(7, 0);
  const auto pt = initial_particles(parse_initial("two:w1=0.25,w2=1,p=0.5"), 2000, h, d);
  std::size_t ones = 0;
  for (auto cell : pt.cells()) {
    CHECK((cell == 1 || cell == 4));
    ones += cell == 1;
  }
  CHECK(std::abs(double(ones) - 1000.0) < 5 * std::sqrt(500.0));
}
