#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "dsk3dom/grid.hpp"
#include "dsk3dom/pipeline.hpp"
#include "dsk3dom/scenario.hpp"
#include "dsk3dom/types.hpp"

namespace dsk3dom {

inline constexpr const char* kToolVersion = "dsk3dom 0.1.0";

// Full-scale particle budgets; RunConfig scales both by particle_scale.
inline constexpr double kFullScaleNu = 2e6;
inline constexpr double kFullScaleNuB = 2e5;

/// Fully resolved run configuration (strict JSON schema, unknown keys
/// rejected). nu/nu_b are derived from particle_scale.
struct RunConfig {
  GridSpec grid;
  FilterParams filter;
  double particle_scale = 0.05;
  std::uint64_t seed = 1;
  int snapshot_stride = 1;
  std::optional<std::string> log_path;
  std::optional<std::string> out_dir;
};

RunConfig load_config(const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

/// FNV-1a 64-bit over a file's bytes, hex-encoded (run manifests).
std::string hash_file(const std::filesystem::path& path);

// ---- measurement log (one frame per line) ----

class LogWriter {
 public:
  explicit LogWriter(const std::filesystem::path& path);
  void write(const SimulatedFrame& frame);

 private:
  std::ofstream out_;
};

std::vector<SimulatedFrame> read_log(const std::filesystem::path& path);

// ---- map snapshots (sparse, lossless round-trip) ----

struct SnapshotCell {
  int i = 0, j = 0, k = 0;
  CellState state;
};

struct Snapshot {
  std::uint64_t frame_index = 0;
  double timestamp = 0.0;
  GridSpec grid;
  Pose sensor_pose;
  std::vector<SnapshotCell> cells;  // only cells with m(Omega) < 1
};

/// Extracts the sparse snapshot of the map after a step.
Snapshot make_snapshot(std::uint64_t frame_index, double timestamp, const Pose& sensor_pose,
                       const GridMap& map);

void write_snapshot(const std::filesystem::path& path, const Snapshot& snapshot);
Snapshot read_snapshot(const std::filesystem::path& path);

/// Rehydrates a dense cell array from a sparse snapshot.
std::vector<CellState> dense_cells(const Snapshot& snapshot);

std::string snapshot_filename(std::uint64_t frame_index);

// Shortest round-trip decimal formatting (std::to_chars); parses back
// bit-identically.
std::string format_double(double v);

}  // namespace dsk3dom
