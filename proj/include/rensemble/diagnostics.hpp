#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rensemble/coupling.hpp"
#include "rensemble/integrator.hpp"
#include "rensemble/state.hpp"

namespace rens {

// Weighted phase dispersion of one observable value: weights w_i = rho_i/rho_a,
// mean is the weighted circular mean, distances are wrapped to (-pi, pi].
struct ValueDispersion {
  std::vector<double> sigma;       // per value; NaN when the value carries no probability
  std::vector<double> mean;        // per value circular mean (same masking)
  std::vector<bool> occupied;
};
ValueDispersion phase_dispersion(const EnsembleState& s);

// Same computation on raw coordinate arrays (used by step observers).
void phase_dispersion_raw(std::span<const int> values, int dim,
                          std::span<const double> phi, std::span<const double> rho,
                          std::span<double> sigma_out, std::span<double> mean_out);

// sigma_phi(t) per observable value, sampled along a run.
struct DispersionSeries {
  std::vector<double> t;
  std::vector<std::vector<double>> sigma;  // [value][sample]; NaN when unoccupied
};

struct ExponentPoint {
  double t = 0.0;  // window center (log scale)
  double n = 0.0;  // d ln sigma / d ln t over the window
};

// Sliding-window least-squares slope of ln sigma vs ln t. Windows span half a
// decade and need at least 20 positive samples; windows failing that are
// skipped. Results are reported at up to max_points log-spaced centers.
std::vector<ExponentPoint> convergence_exponent(std::span<const double> t,
                                                std::span<const double> sigma,
                                                int max_points = 200);

// Slope of the window ending at t_end (same width/count rules); nullopt when
// the window has too few positive samples.
std::optional<double> exponent_at(std::span<const double> t,
                                  std::span<const double> sigma, double t_end);

enum class RunClass { Converged, Diverged, Marginal, Partial };
enum class DecayClass { PowerLaw, Exponential, None };

std::string to_string(RunClass c);
std::string to_string(DecayClass c);

// Classification of a single sigma_phi series against the convergence
// criterion: Diverged when the running max over the last decade reaches 0.5,
// Converged when the fitted n at the horizon is <= -0.2 (or the series
// collapsed below the 1e-12 merge floor), Marginal otherwise.
RunClass classify_convergence(std::span<const double> t,
                              std::span<const double> sigma, double horizon);

// Exponential/power-law discrimination from window slopes at the (possibly
// floor-truncated) horizon and a quarter of it.
DecayClass decay_class(std::span<const double> t, std::span<const double> sigma,
                       double horizon);

struct ConvergenceReport {
  DispersionSeries per_value_sigma;
  std::vector<std::vector<ExponentPoint>> exponent_series;  // per value
  std::vector<RunClass> per_value_class;
  RunClass classification = RunClass::Marginal;
  std::vector<std::optional<double>> n_at_horizon;  // per value
  std::optional<double> sigma_fit;                  // scaled-variance fit, lambda > 0
  DecayClass decay = DecayClass::None;
  double horizon = 0.0;
};

// Aggregates per-value classifications (Partial when values disagree) and the
// decay class of the run; sigma_fit is filled for lambda > 0 (probability-
// weighted over values).
ConvergenceReport classify_run(const DispersionSeries& series,
                               std::span<const double> value_weights,
                               double horizon, double lambda);

std::string report_to_json(const ConvergenceReport& r);

// Sup over observable values of |rho_a(t) - rho_a^QM(t)|, with the unitary
// reference started from collapse_to_equilibrium of the trajectory's initial
// state.
std::vector<double> qm_deviation(const Trajectory& traj, const CouplingMatrix& m);

// Effective eigenvalue H_ii (1 + <dphi^2>).
double effective_energy(double h_ii, double var_dphi);

// Curvature power spectrum estimate in Planck units:
//   (k/Mp)^2 / (16 pi^2 sqrt(3)) + sqrt(3) var0 / (8 pi^2 (Mp t)^2).
double power_spectrum_estimate(double k_over_mp, double t_mp, double var0);

// Vacuum energy density estimate, 14 sqrt(var0) T(TeV)^8 in meV^4.
double vacuum_energy_estimate(double temperature_tev, double var0);

}  // namespace rens
