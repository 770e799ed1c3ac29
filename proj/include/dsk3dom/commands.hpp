#pragma once

#include <filesystem>

namespace dsk3dom {

/// `simulate`: renders a scenario into a measurement log.
void cmd_simulate(const std::filesystem::path& scenario_file,
                  const std::filesystem::path& out_log);

/// `map`: runs the filter over a measurement log, writing snapshots under
/// <out_dir>/snapshots and a run manifest at <out_dir>/manifest.json.
void cmd_map(const std::filesystem::path& config_file, const std::filesystem::path& log_file,
             const std::filesystem::path& out_dir);

/// `eval`: ROC/AUC and per-object velocity error against scenario ground
/// truth; writes roc.csv, velocity.csv, summary.csv.
void cmd_eval(const std::filesystem::path& snapshots_dir,
              const std::filesystem::path& scenario_file, const std::filesystem::path& out_dir,
              double zeta0 = 0.5, int n_thresholds = 101);

/// `export-voxels`: classified occupied cells of one snapshot as an ascii
/// PLY point cloud (green = static, blue = dynamic).
void cmd_export_voxels(const std::filesystem::path& snapshot_file, double zeta0, double zeta1,
                       double zeta2, const std::filesystem::path& out_file);

}  // namespace dsk3dom
