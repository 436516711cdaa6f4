#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "wavekin/trajectory_io.hpp"

using namespace wavekin;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  const auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("moments csv round trip") {
  std::vector<MomentSample> s(3);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i].t = 0.1 * double(i);
    s[i].W = 1.0 / 3.0;
    s[i].E = 2.0 / 7.0 + double(i);
    s[i].phi = s[i].W + s[i].E;
    s[i].phi2 = 1e-300 * double(i + 1);
  }
  s[1].Lambda = 0.125;
  const auto d = scratch("wavekin_io_moments");
  write_moments_csv(d / "m.csv", s);
  {
    std::ifstream in(d / "m.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("t,W,E,phi,phi2,Lambda", 0) == 0);
  }
  const auto r = read_moments_csv(d / "m.csv");
  REQUIRE(r.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(r[i].t == s[i].t);
    CHECK(r[i].W == s[i].W);
    CHECK(r[i].E == s[i].E);
    CHECK(r[i].phi == s[i].phi);
    CHECK(r[i].phi2 == s[i].phi2);
    CHECK(r[i].Lambda == s[i].Lambda);
  }
  CHECK_THROWS(read_moments_csv(d / "nope.csv"));
  fs::remove_all(d);
}

TEST_CASE("events jsonl") {
  Trajectory t;
  t.h = 0.5;
  t.n = 3;
  JumpEvent e;
  e.t = 0.25;
  e.i = 0;
  e.j = 2;
  e.l = 1;
  e.before[0] = 3;
  e.before[1] = 2;
  e.before[2] = 4;
  e.out = 1;
  t.events.push_back(e);
  std::ostringstream os;
  write_events_jsonl(os, t);
  std::istringstream is(os.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(is, line)) {
    ++lines;
    const auto j = nlohmann::json::parse(line);
    CHECK(j["t"] == 0.25);
    CHECK(j["i"] == 0);
    CHECK(j["j"] == 2);
    CHECK(j["l"] == 1);
    CHECK(j["w_new"] == 0.5);
    CHECK_FALSE(j.contains("kind"));
  }
  CHECK(lines == 1);

  t.bound_cell = 10;
  t.events[0].kind = EventKind::Kill;
  std::ostringstream os2;
  write_events_jsonl(os2, t);
  CHECK(nlohmann::json::parse(os2.str())["kind"] == "kill");
}

TEST_CASE("snapshots round trip") {
  const auto d = scratch("wavekin_io_snaps");
  std::vector<double> times{0.0, 0.5, 1.0 / 3.0};
  std::vector<DiscreteMeasure> ms{DiscreteMeasure({{0.25, 0.5}, {0.5, 0.5}}, 0.25),
                                  DiscreteMeasure({{1.0 / 3.0, 0.1}}),
                                  DiscreteMeasure()};
  write_snapshots(d / "s", times, ms);
  CHECK(fs::exists(d / "s" / "index.csv"));
  const auto r = read_snapshots(d / "s");
  REQUIRE(r.times.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.times[i] == times[i]);
    CHECK(r.measures[i].atoms() == ms[i].atoms());
  }
  CHECK(r.measures[0].is_grid());
  CHECK_THROWS(read_snapshots(d / "missing"));
  fs::remove_all(d);
}
