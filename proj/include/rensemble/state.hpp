#pragma once

#include <span>
#include <string>
#include <vector>

namespace rens {

// One beable pair: an observable value and a phase, carrying probability rho.
struct BeableEntry {
  int a = 0;
  double phi = 0.0;
  double rho = 0.0;
};

// Non-equilibrium ensemble state: a list of beable pairs over dim observable
// values. Phases are kept unwrapped (on the real line) during integration;
// wrapping happens only in diagnostics and kernel evaluation.
struct EnsembleState {
  int dim = 0;
  std::vector<BeableEntry> entries;

  std::size_t size() const { return entries.size(); }

  // Total probability per observable value, sum_i rho_i [a_i == a].
  std::vector<double> value_probabilities() const;
};

// Empty when the state satisfies all EnsembleState invariants (rho >= 0,
// sum rho = 1 to 1e-9, every value 0..dim-1 present).
std::vector<std::string> validate_state(const EnsembleState& s);

// Per-entry time derivatives as produced by the evolution laws.
struct Derivatives {
  std::vector<double> dphi;
  std::vector<double> drho;
};

// Equilibrium projection: one entry per observable value with the value's
// total probability and the probability-weighted circular mean of its phases.
EnsembleState collapse_to_equilibrium(const EnsembleState& s);

// Convenience constructor from per-value nested lists (value-major), as used
// by the table presets.
EnsembleState make_state(const std::vector<std::vector<double>>& rho,
                         const std::vector<std::vector<double>>& phi);

// CSV snapshot rows "t,entry_index,a,phi,rho" (with header when header=true).
std::string state_to_csv(const EnsembleState& s, double t, bool header);

// JSON document mirroring EnsembleState.
std::string state_to_json(const EnsembleState& s);
EnsembleState state_from_json(const std::string& text);

}  // namespace rens
