#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rensemble/state.hpp"

namespace rens {

struct IntegratorControls {
  double dt = 1e-3;            // base step, in R^-1 units
  double t_end = 0.0;
  int snapshot_stride = 1;     // snapshots every N accepted steps
  double tolerance = 1e-9;     // per-step relative target, adaptive mode
  enum class Mode { Fixed, Adaptive } mode = Mode::Fixed;
  double rho_floor = 1e-14;    // entries whose rho crosses this are frozen
};

struct Trajectory {
  std::vector<double> times;
  std::vector<EnsembleState> states;
  bool trust_flag = false;      // some entry crossed the rho floor
  long renormalization_count = 0;
  std::uint64_t accepted_steps = 0;
  std::uint64_t rejected_steps = 0;
};

// RHS signature shared by the evolution laws and test doubles.
using RhsFunction = std::function<void(std::span<const double> phi,
                                       std::span<const double> rho,
                                       std::span<double> dphi,
                                       std::span<double> drho)>;

// One classical fourth-order Runge-Kutta step. rho is renormalized only when
// |sum rho - 1| > 1e-9 (renormalized, when non-null, counts occurrences).
// Throws IntegrationFailure on non-finite coordinates.
EnsembleState step(const EnsembleState& s, const RhsFunction& rhs, double dt,
                   bool* renormalized = nullptr);

// Called after every accepted step (and once at t = 0).
using StepObserver = std::function<void(double t, std::span<const double> phi,
                                        std::span<const double> rho,
                                        std::uint64_t step_index)>;

// Advances the state to ctl.t_end. Fixed mode takes uniform steps of ctl.dt
// (plus a final fractional step when t_end is not a multiple); adaptive mode
// uses step doubling against ctl.tolerance and signals stiffness when the
// step collapses below 1e-12. Entries whose rho falls below ctl.rho_floor are
// frozen (their derivatives are zeroed from then on) and the trajectory is
// marked untrusted.
Trajectory evolve(const EnsembleState& s0, const RhsFunction& rhs,
                  const IntegratorControls& ctl,
                  const StepObserver& observer = nullptr);

}  // namespace rens
