#include "rensemble/perturbation.hpp"

#include <cmath>
#include <functional>
#include <json.hpp>
#include <stdexcept>

#include "rensemble/errors.hpp"
#include "rensemble/math_util.hpp"

namespace rens {
namespace {

// Adaptive Simpson on a smooth integrand.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double eps,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * eps)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double eps) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, eps, 48);
}

// integral over x in (-1, 1) of (1-x)^{ap} (1+x)^{am} g(x), with the endpoint
// exponents removed by the analytic substitutions x = 1 - u^{1/(1+ap)} and
// x = -1 + v^{1/(1+am)} whenever the exponent is negative.
double beta_weighted_integral(double ap, double am,
                              const std::function<double(double)>& g) {
  const double eps = 1e-12;
  auto full = [&](double x) {
    return std::pow(1.0 - x, ap) * std::pow(1.0 + x, am) * g(x);
  };

  // right half [0, 1]
  double right;
  if (ap < 0.0) {
    const double p = 1.0 / (1.0 + ap);
    right = p * integrate(
                    [&](double u) {
                      const double x = 1.0 - std::pow(u, p);
                      return std::pow(1.0 + x, am) * g(x);
                    },
                    0.0, 1.0, eps);
  } else {
    right = integrate(full, 0.0, 1.0, eps);
  }

  // left half [-1, 0]
  double left;
  if (am < 0.0) {
    const double q = 1.0 / (1.0 + am);
    left = q * integrate(
                   [&](double v) {
                     const double x = -1.0 + std::pow(v, q);
                     return std::pow(1.0 - x, ap) * g(x);
                   },
                   0.0, 1.0, eps);
  } else {
    left = integrate(full, -1.0, 0.0, eps);
  }
  return left + right;
}

double scaled_moment_integral(const SteadyStateParams& p, int m) {
  // phi_tilde = -1 + sigma x maps the support onto (-1, 1).
  return beta_weighted_integral(p.alpha_plus, p.alpha_minus, [&](double x) {
    return std::pow(-1.0 + p.sigma * x, m);
  });
}

}  // namespace

std::vector<std::string> validate_reduced(const ReducedState& s) {
  std::vector<std::string> out;
  if (s.phi.size() != s.w.size()) out.push_back("reduced: phi and w sizes differ");
  double total = 0.0;
  for (double w : s.w) {
    if (w < 0.0) out.push_back("reduced: negative weight");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    out.push_back("reduced: weights sum to " + std::to_string(total));
  return out;
}

std::pair<std::vector<double>, std::vector<double>> reduced_rhs_exact(
    const ReducedState& s, const Kernel& k) {
  const std::size_t n = s.phi.size();
  std::vector<double> kernel_sum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      kernel_sum[i] += s.w[j] * k(s.phi[i] - s.phi[j]);
  std::vector<double> root(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (kernel_sum[i] <= 0.0)
      throw SingularConfiguration(
          0, "reduced_rhs_exact: kernel-weighted sum vanishes for entry " +
                 std::to_string(i));
    root[i] = std::sqrt(kernel_sum[i]);
  }
  std::vector<double> dphi(n, 0.0), dw(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc_phi = 0.0, acc_w = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = s.phi[i] - s.phi[j];
      acc_phi += s.w[j] * std::cos(d) * (root[j] / root[i]);
      acc_w += s.w[j] * std::sin(d) * (root[i] * root[j]);
    }
    dphi[i] = acc_phi;
    dw[i] = 2.0 * s.w[i] * acc_w;
  }
  return {std::move(dphi), std::move(dw)};
}

std::pair<std::vector<double>, std::vector<double>> reduced_rhs_taylor(
    const ReducedState& s) {
  const std::size_t n = s.phi.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += s.w[i] * s.phi[i];
  std::vector<double> dphi_rel(n), dw(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = s.phi[i] - mean;
    dphi_rel[i] = 0.5 * s.lambda * d * d;
    dw[i] = 2.0 * s.w[i] * d;
  }
  return {std::move(dphi_rel), std::move(dw)};
}

double phi_tilde_flow(double phi_tilde, double sigma) {
  return 0.5 * (phi_tilde + sigma + 1.0) * (phi_tilde - sigma + 1.0);
}

std::pair<double, double> fixed_points(double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("fixed_points: sigma must be positive");
  return {-1.0 + sigma, -1.0 - sigma};
}

SteadyStateParams SteadyStateParams::make(double lambda, double sigma) {
  if (!(lambda > 0.0))
    throw std::domain_error(
        "steady state: no normalizable solution for lambda <= 0");
  if (!(sigma > 1.0))
    throw std::domain_error("steady state: lambda > 0 requires sigma > 1");
  SteadyStateParams p;
  p.lambda = lambda;
  p.sigma = sigma;
  p.alpha_plus = -1.0 + 2.0 / lambda - 2.0 / (lambda * sigma);
  p.alpha_minus = -1.0 + 2.0 / lambda + 2.0 / (lambda * sigma);
  p.phi_plus = -1.0 + sigma;
  p.phi_minus = -1.0 - sigma;
  return p;
}

double steady_state_density(const SteadyStateParams& p, double phi_tilde) {
  if (!(phi_tilde > p.phi_minus) || !(phi_tilde < p.phi_plus))
    throw std::domain_error("steady_state_density: phi_tilde outside the support");
  return std::pow(p.phi_plus - phi_tilde, p.alpha_plus) *
         std::pow(phi_tilde - p.phi_minus, p.alpha_minus);
}

double steady_state_normalization(const SteadyStateParams& p) {
  // d(phi_tilde) = sigma dx and the density picks up sigma^{a+ + a-}.
  const double scale =
      std::pow(p.sigma, p.alpha_plus + p.alpha_minus + 1.0);
  return scale * scaled_moment_integral(p, 0);
}

double steady_state_moment(const SteadyStateParams& p, int m) {
  return scaled_moment_integral(p, m) / scaled_moment_integral(p, 0);
}

double sample_steady_state(const SteadyStateParams& p, std::mt19937_64& rng) {
  // (1+x)/2 on [0,1] is Beta(alpha_minus + 1, alpha_plus + 1).
  std::gamma_distribution<double> ga(p.alpha_minus + 1.0, 1.0);
  std::gamma_distribution<double> gb(p.alpha_plus + 1.0, 1.0);
  const double u = ga(rng);
  const double v = gb(rng);
  const double x = 2.0 * (u / (u + v)) - 1.0;
  return -1.0 + p.sigma * x;
}

double variance_prediction(double lambda, double sigma) {
  if (std::fabs(lambda + 4.0) < 1e-12)
    throw std::domain_error("variance_prediction: lambda = -4 is singular");
  return (sigma * sigma - 1.0) / (1.0 + 4.0 / lambda);
}

double static_density_exponent(double lambda) {
  if (!(lambda > -1.0) || !(lambda < 0.0))
    throw std::domain_error("static_density_exponent: need -1 < lambda < 0");
  return 4.0 / lambda - 2.0;
}

double static_cutoff_variance(double lambda, double dphi_min) {
  if (!(lambda > -1.0) || !(lambda < 0.0))
    throw std::domain_error("static_cutoff_variance: need -1 < lambda < 0");
  return (lambda - 4.0) / (-lambda - 4.0) * dphi_min * dphi_min;
}

double moment_hierarchy_rhs(const std::map<int, double>& moments, double lambda,
                            int m) {
  if (m < 1) throw std::invalid_argument("moment_hierarchy_rhs: m must be >= 1");
  for (int need : {m - 1, m + 1, 2})
    if (moments.find(need) == moments.end())
      throw std::invalid_argument("moment_hierarchy_rhs: missing moment of order " +
                                  std::to_string(need));
  const double up = moments.at(m + 1);
  const double down = moments.at(m - 1);
  const double var = moments.at(2);
  return (2.0 + 0.5 * m * lambda) * up - 0.5 * m * (lambda + 4.0) * var * down;
}

double mean_phase_drift(double var_dphi) {
  if (var_dphi < 0.0)
    throw std::domain_error("mean_phase_drift: variance must be non-negative");
  return 1.0 + var_dphi;
}

OracleReport make_oracle_report(double lambda, std::optional<double> sigma_fit) {
  OracleReport r;
  r.lambda = lambda;
  r.sigma_fit = sigma_fit;
  const double tol = 1e-12;
  if (lambda > tol)
    r.predicted_decay_class = DecayClass::PowerLaw;
  else if (lambda < -tol && lambda > -1.0)
    r.predicted_decay_class = DecayClass::Exponential;
  else
    r.predicted_decay_class = DecayClass::None;
  if (lambda > tol && sigma_fit && *sigma_fit > 1.0) {
    const auto p = SteadyStateParams::make(lambda, *sigma_fit);
    r.alpha_plus = p.alpha_plus;
    r.alpha_minus = p.alpha_minus;
    r.predicted_variance = variance_prediction(lambda, *sigma_fit);
  }
  return r;
}

std::string oracle_report_to_json(const OracleReport& r) {
  nlohmann::json j;
  j["lambda"] = r.lambda;
  j["predicted_decay_class"] = to_string(r.predicted_decay_class);
  if (r.sigma_fit) j["sigma_fit"] = *r.sigma_fit;
  if (r.alpha_plus) j["alpha_plus"] = *r.alpha_plus;
  if (r.alpha_minus) j["alpha_minus"] = *r.alpha_minus;
  if (r.predicted_variance) j["predicted_variance"] = *r.predicted_variance;
  return j.dump(2);
}

}  // namespace rens
