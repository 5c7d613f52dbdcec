#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rensemble/coupling.hpp"
#include "rensemble/diagnostics.hpp"
#include "rensemble/dynamics.hpp"
#include "rensemble/integrator.hpp"
#include "rensemble/kernel.hpp"
#include "rensemble/perturbation.hpp"
#include "rensemble/state.hpp"

namespace rens {

struct ExperimentConfig {
  CouplingMatrix coupling;
  std::optional<PauliCoefficients> pauli;  // set when given in Pauli form
  std::string kernel_spec = "cosine";
  Kernel kernel = Kernel::cosine();
  EvolutionModel model = EvolutionModel::A;
  EnsembleState initial;
  IntegratorControls controls;
  double horizon = 1000.0;
  std::uint64_t seed = 0;
  std::string out_dir;     // empty: keep artifacts in memory only
  std::string label;       // preset/run name stamped into the manifest
};

// Parses and validates the JSON config document; throws ConfigError carrying
// every violation found. See README for the schema.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

// Canonical fingerprint over the semantically meaningful fields (hamiltonian,
// kernel, model, initial entries, integrator controls, horizon, seed).
std::uint64_t config_hash(const ExperimentConfig& cfg);

struct RunArtifacts {
  Trajectory trajectory;          // snapshots at the configured stride
  DispersionSeries sigma_series;  // dense sigma_phi(t) per value
  ConvergenceReport report;
  std::optional<OracleReport> oracle;  // diagonal Hamiltonians only
  std::vector<double> qm_gap;          // sup_a |rho_a - rho_a^QM| per snapshot
  std::uint64_t hash = 0;
  double wall_seconds = 0.0;
};

// Deterministic for a fixed config. When cfg.out_dir is set, writes
// trajectory.csv, sigma.csv, report.json, manifest.json and (for diagonal
// Hamiltonians) oracle.json under it.
RunArtifacts run_experiment(const ExperimentConfig& cfg);

// Scan grid over the kernel width c (c = 0 means the flat kernel) and the
// initial phase separation dphi0. The template supplies everything else; its
// initial pattern expands as phi = phi_base + phi_coeff * dphi0.
struct PatternEntry {
  int a = 0;
  double rho = 0.0;
  double phi_base = 0.0;
  double phi_coeff = 0.0;
};

struct ScanGrid {
  std::vector<double> c_values;
  std::vector<double> dphi0_values;
  ExperimentConfig base;                // kernel and initial are placeholders
  std::vector<PatternEntry> pattern;
};

ScanGrid parse_scan_config(const std::string& json_text);
ScanGrid load_scan_config(const std::string& path);

struct ScanCellResult {
  double c = 0.0;
  double dphi0 = 0.0;
  RunClass classification = RunClass::Marginal;
  std::vector<RunClass> per_value;
  std::optional<double> n_at_horizon;  // worst (largest) per-value slope
  std::string error;                   // non-empty when the cell failed
};

// Runs every grid cell (jobs workers); failures are recorded per cell and do
// not stop the scan. Row order is c-major then dphi0, independent of worker
// scheduling. When out_dir is set, writes scan.csv and manifest.json.
std::vector<ScanCellResult> scan_phase_space(const ScanGrid& grid, int jobs,
                                             const std::string& out_dir = "");

std::string scan_to_csv(const std::vector<ScanCellResult>& rows, bool header);

// Named reproductions of the study configurations. Presets: table1, table3,
// table4_moderate, table5_large, table6_identity, masterplot, masterplot2.
std::vector<std::string> reproduce_presets();
ExperimentConfig preset_table1_config(const std::string& kernel_spec,
                                      EvolutionModel model);
// Runs the preset, writing artifacts under out_dir; returns emitted paths.
std::vector<std::string> reproduce(const std::string& preset,
                                   const std::string& out_dir, int jobs,
                                   EvolutionModel model = EvolutionModel::A);

inline constexpr const char* kSoftwareVersion = "0.1.0";

}  // namespace rens
