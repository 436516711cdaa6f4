#include "wavekin/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wavekin {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
  return os;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw std::runtime_error("cannot open '" + p.string() + "'");
  return is;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, const fs::path& p) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("'" + p.string() + "': malformed number '" + s + "'");
  }
}

const char* kind_name(EventKind k) {
  switch (k) {
    case EventKind::Jump: return "jump";
    case EventKind::Escape: return "escape";
    case EventKind::Kill: return "kill";
  }
  return "jump";
}

}  // namespace

void write_moments_csv(std::ostream& os, const std::vector<MomentSample>& samples) {
  os << "t,W,E,phi,phi2,Lambda\n";
  for (const auto& s : samples) {
    os << format_double(s.t) << ',' << format_double(s.W) << ',' << format_double(s.E) << ','
       << format_double(s.phi) << ',' << format_double(s.phi2) << ',';
    if (s.Lambda) os << format_double(*s.Lambda);
    os << '\n';
  }
}

void write_moments_csv(const fs::path& path, const std::vector<MomentSample>& samples) {
  auto os = open_out(path);
  write_moments_csv(os, samples);
}

std::vector<MomentSample> read_moments_csv(const fs::path& path) {
  auto is = open_in(path);
  std::string line;
  if (!std::getline(is, line) || line != "t,W,E,phi,phi2,Lambda") {
    throw std::runtime_error("'" + path.string() + "': expected header t,W,E,phi,phi2,Lambda");
  }
  std::vector<MomentSample> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 6) throw std::runtime_error("'" + path.string() + "': expected 6 fields");
    MomentSample s;
    s.t = to_double(f[0], path);
    s.W = to_double(f[1], path);
    s.E = to_double(f[2], path);
    s.phi = to_double(f[3], path);
    s.phi2 = to_double(f[4], path);
    if (!f[5].empty()) s.Lambda = to_double(f[5], path);
    out.push_back(s);
  }
  return out;
}

void write_events_jsonl(std::ostream& os, const Trajectory& traj) {
  const bool truncated = traj.bound_cell.has_value();
  for (const auto& ev : traj.events) {
    os << "{\"t\":" << format_double(ev.t) << ",\"i\":" << ev.i << ",\"j\":" << ev.j
       << ",\"l\":" << ev.l << ",\"w_new\":" << format_double(static_cast<double>(ev.out) * traj.h);
    if (truncated) os << ",\"kind\":\"" << kind_name(ev.kind) << '"';
    os << "}\n";
  }
}

void write_events_jsonl(const fs::path& path, const Trajectory& traj) {
  auto os = open_out(path);
  write_events_jsonl(os, traj);
}

void write_snapshots(const fs::path& dir, const std::vector<double>& times,
                     const std::vector<DiscreteMeasure>& measures) {
  if (times.size() != measures.size()) {
    throw std::invalid_argument("write_snapshots: times and measures differ in length");
  }
  fs::create_directories(dir);
  auto idx = open_out(dir / "index.csv");
  idx << "index,t\n";
  for (std::size_t k = 0; k < times.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%05zu.csv", k);
    write_measure_csv((dir / name).string(), measures[k]);
    idx << k << ',' << format_double(times[k]) << '\n';
  }
}

Snapshots read_snapshots(const fs::path& dir) {
  auto is = open_in(dir / "index.csv");
  std::string line;
  if (!std::getline(is, line) || line != "index,t") {
    throw std::runtime_error("'" + (dir / "index.csv").string() + "': expected header index,t");
  }
  Snapshots s;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 2) throw std::runtime_error("snapshot index: expected 2 fields");
    char name[32];
    std::snprintf(name, sizeof name, "snap_%05zu.csv", s.times.size());
    s.times.push_back(to_double(f[1], dir / "index.csv"));
    s.measures.push_back(read_measure_csv((dir / name).string()));
  }
  return s;
}

}  // namespace wavekin
