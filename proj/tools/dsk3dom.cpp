#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dsk3dom/commands.hpp"
#include "dsk3dom/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"DS-K3DOM: 3-D dynamic occupancy mapping"};
  app.require_subcommand(1);

  std::string scenario_file, log_file, config_file, out_path, snapshots_dir, snapshot_file;
  double zeta0 = 0.5, zeta1 = 0.5, zeta2 = 0.5;

  auto* simulate = app.add_subcommand("simulate", "Render a scenario into a measurement log");
  simulate->add_option("--scenario", scenario_file, "Scenario JSON file")->required();
  simulate->add_option("--out", out_path, "Output measurement log")->required();

  auto* map = app.add_subcommand("map", "Run the occupancy filter over a measurement log");
  map->add_option("--config", config_file, "Run configuration JSON file")->required();
  map->add_option("--log", log_file, "Measurement log");
  map->add_option("--out", out_path, "Output directory");

  auto* eval = app.add_subcommand("eval", "Evaluate snapshots against scenario ground truth");
  eval->add_option("--snapshots", snapshots_dir, "Snapshot directory")->required();
  eval->add_option("--scenario", scenario_file, "Scenario JSON file")->required();
  eval->add_option("--out", out_path, "Output directory")->required();
  eval->add_option("--zeta0", zeta0, "Insufficient-observation filter threshold");

  auto* exp = app.add_subcommand("export-voxels", "Export classified cells as an ascii PLY");
  exp->add_option("--snapshot", snapshot_file, "Snapshot file")->required();
  exp->add_option("--zeta0", zeta0, "Insufficient-observation filter threshold");
  exp->add_option("--zeta1", zeta1, "Occupied threshold");
  exp->add_option("--zeta2", zeta2, "Dynamic threshold");
  exp->add_option("--out", out_path, "Output PLY file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      dsk3dom::cmd_simulate(scenario_file, out_path);
    } else if (map->parsed()) {
      // --log/--out fall back to the config's own paths when omitted.
      auto cfg = dsk3dom::load_config(config_file);
      const std::string log = !log_file.empty() ? log_file : cfg.log_path.value_or("");
      const std::string out = !out_path.empty() ? out_path : cfg.out_dir.value_or("");
      if (log.empty()) throw std::runtime_error("no measurement log given (--log or config 'log')");
      if (out.empty()) throw std::runtime_error("no output directory given (--out or config 'out')");
      dsk3dom::cmd_map(config_file, log, out);
    } else if (eval->parsed()) {
      dsk3dom::cmd_eval(snapshots_dir, scenario_file, out_path, zeta0);
    } else if (exp->parsed()) {
      dsk3dom::cmd_export_voxels(snapshot_file, zeta0, zeta1, zeta2, out_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
