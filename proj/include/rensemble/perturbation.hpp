#pragma once

#include <map>
#include <random>
#include <utility>
#include <vector>

#include "rensemble/diagnostics.hpp"
#include "rensemble/kernel.hpp"

namespace rens {

// Reduced same-value subsystem of a diagonal Hamiltonian, with R_aa scaled to
// one (time measured in R_aa^-1 units). lambda is the kernel curvature
// parameter carried for the closed-form predictions.
struct ReducedState {
  std::vector<double> phi;
  std::vector<double> w;  // normalized weights
  double lambda = 0.0;
};

std::vector<std::string> validate_reduced(const ReducedState& s);

// Exact reduced dynamics:
//   dphi_i = sum_j w_j cos(phi_i-phi_j) sqrt(S_j/S_i)
//   dw_i   = 2 w_i sum_j w_j sin(phi_i-phi_j) sqrt(S_i S_j)
// with S_i = sum_k w_k F(phi_i - phi_k). Throws SingularConfiguration when an
// S_i vanishes.
std::pair<std::vector<double>, std::vector<double>> reduced_rhs_exact(
    const ReducedState& s, const Kernel& k);

// Leading-order expansion for tightly clustered phases. The first vector is
// (lambda/2)(phi_i - <phi>)^2 per entry, whose pairwise differences are the
// relative phase velocities; the second is dw_i = 2 w_i (phi_i - <phi>).
std::pair<std::vector<double>, std::vector<double>> reduced_rhs_taylor(
    const ReducedState& s);

// Rescaled-phase flow d(phi_tilde)/d(ln t) = (1/2)(pt + sigma + 1)(pt - sigma + 1).
double phi_tilde_flow(double phi_tilde, double sigma);

// Fixed points (-1 + sigma, -1 - sigma); the plus point is unstable, the
// minus point stable.
std::pair<double, double> fixed_points(double sigma);

// Steady-state family for lambda > 0:
//   w(pt) ~ (pt_plus - pt)^{alpha_plus} (pt - pt_minus)^{alpha_minus},
//   alpha_pm = -1 + 2/lambda -+ 2/(lambda sigma).
struct SteadyStateParams {
  double lambda = 0.0;
  double sigma = 0.0;
  double alpha_plus = 0.0;
  double alpha_minus = 0.0;
  double phi_plus = 0.0;
  double phi_minus = 0.0;

  // Throws std::domain_error unless lambda > 0 and sigma > 1.
  static SteadyStateParams make(double lambda, double sigma);
};

// Unnormalized density; phi_tilde must lie inside (phi_minus, phi_plus).
double steady_state_density(const SteadyStateParams& p, double phi_tilde);

// integral of w over (phi_minus, phi_plus) by endpoint-weighted adaptive
// quadrature (the endpoint exponents are removed analytically).
double steady_state_normalization(const SteadyStateParams& p);

// <phi_tilde^m> of the normalized density, by the same quadrature.
double steady_state_moment(const SteadyStateParams& p, int m);

// Draws from the normalized density (beta representation of the shifted
// interval).
double sample_steady_state(const SteadyStateParams& p, std::mt19937_64& rng);

// <phi_tilde^2> = (sigma^2 - 1)/(1 + 4/lambda); lambda = -4 is singular.
double variance_prediction(double lambda, double sigma);

// Static-solution exponent 4/lambda - 2, valid for -1 < lambda < 0.
double static_density_exponent(double lambda);

// Cutoff variance <dphi^2> = (lambda-4)/(-lambda-4) * dphi_min^2.
double static_cutoff_variance(double lambda, double dphi_min);

// d<dphi^m>/dt = (2 + m lambda/2) <dphi^{m+1}> - m(lambda+4)/2 <dphi^2><dphi^{m-1}>.
// moments maps order -> value and must contain orders m-1, m+1 and 2.
double moment_hierarchy_rhs(const std::map<int, double>& moments, double lambda,
                            int m);

// d<phi>/dt = 1 + <dphi^2> in R_aa units.
double mean_phase_drift(double var_dphi);

// Oracle summary for a diagonal-Hamiltonian run.
struct OracleReport {
  double lambda = 0.0;
  std::optional<double> sigma_fit;
  std::optional<double> alpha_plus;
  std::optional<double> alpha_minus;
  std::optional<double> predicted_variance;
  DecayClass predicted_decay_class = DecayClass::None;
};

OracleReport make_oracle_report(double lambda, std::optional<double> sigma_fit);
std::string oracle_report_to_json(const OracleReport& r);

}  // namespace rens
