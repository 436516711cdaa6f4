// On-disk formats for trajectories: moment traces (CSV), event logs (JSONL)
// and measure snapshots (a directory of measure CSVs plus an index).
#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "wavekin/measures.hpp"
#include "wavekin/particle.hpp"

namespace wavekin {

/// Header `t,W,E,phi,phi2,Lambda`; Lambda is left empty when absent.
void write_moments_csv(std::ostream& os, const std::vector<MomentSample>& samples);
void write_moments_csv(const std::filesystem::path& path, const std::vector<MomentSample>& samples);
std::vector<MomentSample> read_moments_csv(const std::filesystem::path& path);

/// One JSON object per line: {"t":..,"i":..,"j":..,"l":..,"w_new":..}. Truncated
/// runs add "kind" ("jump", "escape" or "kill").
void write_events_jsonl(std::ostream& os, const Trajectory& traj);
void write_events_jsonl(const std::filesystem::path& path, const Trajectory& traj);

struct Snapshots {
  std::vector<double> times;
  std::vector<DiscreteMeasure> measures;
};

/// dir/index.csv (`index,t`) and dir/snap_NNNNN.csv per entry.
void write_snapshots(const std::filesystem::path& dir, const std::vector<double>& times,
                     const std::vector<DiscreteMeasure>& measures);
Snapshots read_snapshots(const std::filesystem::path& dir);

}  // namespace wavekin
