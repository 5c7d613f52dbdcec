// Command-line front end: run single experiments, scan the (c, dphi0)
// convergence phase diagram, reproduce the study presets, or validate a
// config. Exit codes: 0 success, 1 config error, 2 runtime integration error,
// 3 partial scan failure.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <thread>

#include "rensemble/errors.hpp"
#include "rensemble/experiment.hpp"

namespace {

rens::EvolutionModel parse_model(const std::string& s) {
  if (s == "a" || s == "A") return rens::EvolutionModel::A;
  if (s == "b" || s == "B") return rens::EvolutionModel::B;
  throw rens::ConfigError("--model must be 'a' or 'b'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"real-ensemble quantum dynamics laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, model_str, preset;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  unsigned long long seed = 0;
  bool seed_given = false, model_given = false;

  auto add_common = [&](CLI::App* cmd, bool with_jobs) {
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option_function<std::string>(
           "--model", [&](const std::string& s) { model_str = s; model_given = true; },
           "evolution law: a or b");
    cmd->add_option_function<unsigned long long>(
           "--seed", [&](unsigned long long s) { seed = s; seed_given = true; },
           "random seed for Monte Carlo experiments");
    if (with_jobs) cmd->add_option("--jobs", jobs, "parallel workers");
  };

  auto* run_cmd = app.add_subcommand("run", "run one experiment config");
  run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();
  add_common(run_cmd, false);

  auto* scan_cmd = app.add_subcommand("scan", "run a (c, dphi0) scan config");
  scan_cmd->add_option("config", config_path, "scan config (JSON)")->required();
  add_common(scan_cmd, true);

  auto* rep_cmd = app.add_subcommand("reproduce", "run a named preset");
  rep_cmd->add_option("preset", preset, "preset name")->required();
  add_common(rep_cmd, true);

  auto* val_cmd = app.add_subcommand("validate", "validate a config and exit");
  val_cmd->add_option("config", config_path, "experiment config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      auto cfg = rens::load_experiment_config(config_path);
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      if (cfg.out_dir.empty()) cfg.out_dir = "run_output";
      if (model_given) cfg.model = parse_model(model_str);
      if (seed_given) cfg.seed = seed;
      const auto art = rens::run_experiment(cfg);
      std::printf("run complete: %s, decay %s, wall %.2fs -> %s\n",
                  rens::to_string(art.report.classification).c_str(),
                  rens::to_string(art.report.decay).c_str(), art.wall_seconds,
                  cfg.out_dir.c_str());
      return 0;
    }
    if (scan_cmd->parsed()) {
      auto grid = rens::load_scan_config(config_path);
      if (model_given) grid.base.model = parse_model(model_str);
      if (out_dir.empty()) out_dir = "scan_output";
      const auto rows = rens::scan_phase_space(grid, jobs, out_dir);
      std::size_t failures = 0;
      for (const auto& r : rows)
        if (!r.error.empty()) ++failures;
      std::printf("scan complete: %zu cells, %zu failed -> %s/scan.csv\n",
                  rows.size(), failures, out_dir.c_str());
      return failures == 0 ? 0 : 3;
    }
    if (rep_cmd->parsed()) {
      if (out_dir.empty()) out_dir = preset + "_output";
      const auto model =
          model_given ? parse_model(model_str) : rens::EvolutionModel::A;
      const auto paths = rens::reproduce(preset, out_dir, jobs, model);
      for (const auto& p : paths) std::printf("wrote %s\n", p.c_str());
      return 0;
    }
    if (val_cmd->parsed()) {
      rens::load_experiment_config(config_path);
      std::printf("config ok\n");
      return 0;
    }
  } catch (const rens::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 2;
  }
  return 0;
}
