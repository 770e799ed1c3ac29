#include "dsk3dom/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <vector>

#include <json.hpp>

#include "dsk3dom/evaluation.hpp"
#include "dsk3dom/io.hpp"
#include "dsk3dom/pipeline.hpp"
#include "dsk3dom/scenario.hpp"

namespace dsk3dom {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool log_quiet() {
  const char* env = std::getenv("DSK3DOM_LOG");
  return env != nullptr && std::string(env) == "quiet";
}

void progress(const std::string& message) {
  if (!log_quiet()) std::cerr << message << "\n";
}

}  // namespace

void cmd_simulate(const fs::path& scenario_file, const fs::path& out_log) {
  const Scenario scenario = load_scenario(scenario_file);
  LogWriter writer(out_log);
  const int frames = scenario.frame_count();
  for (int n = 0; n < frames; ++n)
    writer.write(simulate_frame(scenario, scenario.frame_time(n)));
  progress("simulate: wrote " + std::to_string(frames) + " frames to " + out_log.string());
}

void cmd_map(const fs::path& config_file, const fs::path& log_file, const fs::path& out_dir) {
  const RunConfig cfg = load_config(config_file);
  const std::vector<SimulatedFrame> log = read_log(log_file);

  const fs::path snap_dir = out_dir / "snapshots";
  fs::create_directories(snap_dir);

  Pipeline pipeline(cfg.grid, cfg.filter, cfg.seed);
  json per_frame = json::array();
  std::uint64_t written = 0;
  for (std::size_t n = 0; n < log.size(); ++n) {
    const MeasurementFrame frame = to_measurement(log[n]);
    const StepStats stats = pipeline.step(frame);
    if (n % static_cast<std::size_t>(cfg.snapshot_stride) == 0) {
      const Snapshot snap =
          make_snapshot(stats.frame_index, frame.timestamp, frame.sensor_pose, pipeline.map());
      write_snapshot(snap_dir / snapshot_filename(stats.frame_index), snap);
      ++written;
    }
    per_frame.push_back({
        {"index", stats.frame_index},
        {"t", frame.timestamp},
        {"ms", stats.timings.total_ms},
        {"particles", stats.particle_count},
        {"stages",
         {{"predict", stats.timings.predict_ms},
          {"mass_predict", stats.timings.mass_predict_ms},
          {"evidence", stats.timings.evidence_ms},
          {"update", stats.timings.update_ms},
          {"weights", stats.timings.weights_ms},
          {"resample", stats.timings.resample_ms},
          {"velocity", stats.timings.velocity_ms},
          {"recenter", stats.timings.recenter_ms}}},
        {"leaks",
         {{"out_of_grid", stats.leak_out_of_grid},
          {"ground_filter", stats.leak_ground_filter},
          {"rho_p_no_particles", stats.leak_rho_p_no_particles},
          {"birth_unallocated", stats.leak_birth_unallocated}}},
    });
    if ((n + 1) % 10 == 0 || n + 1 == log.size())
      progress("map: frame " + std::to_string(n + 1) + "/" + std::to_string(log.size()));
  }

  const json manifest = {
      {"tool", kToolVersion},
      {"formats", {{"log", 1}, {"snapshot", 1}}},
      {"config_hash", hash_file(config_file)},
      {"seed", cfg.seed},
      {"particle_scale", cfg.particle_scale},
      {"nu", cfg.filter.nu},
      {"nu_b", cfg.filter.nu_b},
      {"snapshot_stride", cfg.snapshot_stride},
      {"frames", log.size()},
      {"snapshots_written", written},
      {"per_frame", per_frame},
  };
  std::ofstream mf(out_dir / "manifest.json");
  mf << manifest.dump(2) << "\n";
}

namespace {

struct SnapshotEntry {
  std::uint64_t index;
  fs::path path;
};

std::vector<SnapshotEntry> list_snapshots(const fs::path& dir) {
  std::vector<SnapshotEntry> entries;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("snapshot_", 0) == 0 && e.path().extension() == ".dsnap") {
      entries.push_back({std::stoull(name.substr(9, 6)), e.path()});
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const SnapshotEntry& a, const SnapshotEntry& b) { return a.index < b.index; });
  return entries;
}

}  // namespace

void cmd_eval(const fs::path& snapshots_dir, const fs::path& scenario_file,
              const fs::path& out_dir, double zeta0, int n_thresholds) {
  const Scenario scenario = load_scenario(scenario_file);
  const std::vector<SnapshotEntry> entries = list_snapshots(snapshots_dir);
  if (entries.empty()) throw std::runtime_error("no snapshots found in " + snapshots_dir.string());

  // Alignment: uniform stride over frame indices, timestamps on the
  // scenario's frame clock.
  const std::uint64_t stride = entries.size() > 1 ? entries[1].index - entries[0].index : 1;
  for (std::size_t n = 1; n < entries.size(); ++n) {
    if (entries[n].index - entries[n - 1].index != stride)
      throw std::runtime_error("snapshot frames are not uniformly strided (missing snapshot near index " +
                               std::to_string(entries[n].index) + ")");
  }

  std::vector<LabeledScore> occupied_samples;
  std::vector<LabeledScore> dynamic_samples;
  std::vector<VelocityRecord> velocity_records;

  for (const auto& entry : entries) {
    const Snapshot snap = read_snapshot(entry.path);
    const double expected_t = scenario.frame_time(static_cast<int>(entry.index));
    if (snap.timestamp > scenario.duration + 1e-9 ||
        std::abs(snap.timestamp - expected_t) > 1e-6)
      throw std::runtime_error("snapshot " + entry.path.filename().string() +
                               " does not align with the scenario timeline");

    const std::vector<CellState> cells = dense_cells(snap);
    const std::vector<char> labels = ground_truth_labels(scenario, snap.timestamp, snap.grid);
    collect_roc_samples(cells, labels, RocTarget::Occupied, zeta0, occupied_samples);
    collect_roc_samples(cells, labels, RocTarget::Dynamic, zeta0, dynamic_samples);

    for (const auto& obj : scenario.objects) {
      if (!obj.dynamic()) continue;
      std::vector<std::int64_t> members;
      for (std::int64_t c = 0; c < snap.grid.cell_count(); ++c)
        if (obj.contains(snap.grid.cell_center(c), snap.timestamp)) members.push_back(c);
      if (members.empty()) continue;
      try {
        VelocityRecord rec;
        rec.t = snap.timestamp;
        rec.object_id = obj.id;
        rec.v_est = object_velocity(cells, members);
        rec.v_true = obj.velocity;
        rec.err_norm = (rec.v_est - rec.v_true).norm();
        velocity_records.push_back(rec);
      } catch (const ZeroDynamicMassError&) {
        // object not yet detected at this frame
      }
    }
  }

  fs::create_directories(out_dir);

  double auc_o = std::numeric_limits<double>::quiet_NaN();
  double auc_d = std::numeric_limits<double>::quiet_NaN();
  {
    std::ofstream roc(out_dir / "roc.csv");
    roc << "curve,threshold,tpr,fpr\n";
    const RocCurve curve_o = roc_from_scores(occupied_samples, n_thresholds);
    auc_o = curve_o.auc;
    for (const auto& p : curve_o.points)
      roc << "O," << format_double(p.threshold) << ',' << format_double(p.tpr) << ','
          << format_double(p.fpr) << "\n";
    try {
      const RocCurve curve_d = roc_from_scores(dynamic_samples, n_thresholds);
      auc_d = curve_d.auc;
      for (const auto& p : curve_d.points)
        roc << "D," << format_double(p.threshold) << ',' << format_double(p.tpr) << ','
            << format_double(p.fpr) << "\n";
    } catch (const NoPositivesError&) {
      progress("eval: no dynamic ground-truth cells; D curve skipped");
    }
  }
  {
    std::ofstream vel(out_dir / "velocity.csv");
    vel << "t,object,vest_x,vest_y,vest_z,vtrue_x,vtrue_y,vtrue_z,err_norm\n";
    for (const auto& r : velocity_records) {
      vel << format_double(r.t) << ',' << r.object_id << ',' << format_double(r.v_est.x()) << ','
          << format_double(r.v_est.y()) << ',' << format_double(r.v_est.z()) << ','
          << format_double(r.v_true.x()) << ',' << format_double(r.v_true.y()) << ','
          << format_double(r.v_true.z()) << ',' << format_double(r.err_norm) << "\n";
    }
  }
  {
    std::ofstream summary(out_dir / "summary.csv");
    summary << "auc_o,auc_d\n";
    summary << format_double(auc_o) << ',' << format_double(auc_d) << "\n";
  }
  progress("eval: " + std::to_string(entries.size()) + " snapshots, AUC_O=" +
           std::to_string(auc_o) + " AUC_D=" + std::to_string(auc_d));
}

void cmd_export_voxels(const fs::path& snapshot_file, double zeta0, double zeta1, double zeta2,
                       const fs::path& out_file) {
  const Snapshot snap = read_snapshot(snapshot_file);

  struct Point {
    Vec3 p;
    bool dynamic;
  };
  std::vector<Point> points;
  for (const auto& c : snap.cells) {
    const CellLabel label = classify_cell(c.state, zeta0, zeta1, zeta2);
    if (label != CellLabel::Occupied && label != CellLabel::DynamicOccupied) continue;
    points.push_back({snap.grid.cell_center(snap.grid.flat(c.i, c.j, c.k)),
                      label == CellLabel::DynamicOccupied});
  }

  std::ofstream out(out_file);
  if (!out) throw std::runtime_error("cannot open " + out_file.string() + " for writing");
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << points.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  for (const auto& pt : points) {
    out << format_double(pt.p.x()) << ' ' << format_double(pt.p.y()) << ' '
        << format_double(pt.p.z());
    out << (pt.dynamic ? " 0 0 255\n" : " 0 255 0\n");
  }
  progress("export-voxels: wrote " + std::to_string(points.size()) + " cells to " +
           out_file.string());
}

}  // namespace dsk3dom
