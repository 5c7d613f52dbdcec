#include "rensemble/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>

#include "rensemble/math_util.hpp"

namespace rens {
namespace {

constexpr double kMergeFloor = 1e-12;    // sigma below this is numerical merge
constexpr double kDivergedScale = 0.5;   // running-max threshold, last decade
constexpr double kConvergedSlope = -0.2;
constexpr double kHalfDecade = 0.5;      // window width in log10 t

struct WindowSums {
  // prefix sums over samples with sigma > 0
  std::vector<double> lx, ly, lxx, lxy;
  std::vector<int> cnt;
  std::vector<double> t;

  WindowSums(std::span<const double> ts, std::span<const double> sigma) {
    const std::size_t n = ts.size();
    lx.assign(n + 1, 0.0);
    ly.assign(n + 1, 0.0);
    lxx.assign(n + 1, 0.0);
    lxy.assign(n + 1, 0.0);
    cnt.assign(n + 1, 0);
    t.assign(ts.begin(), ts.end());
    for (std::size_t i = 0; i < n; ++i) {
      double x = 0.0, y = 0.0;
      int c = 0;
      if (ts[i] > 0.0 && sigma[i] > 0.0 && std::isfinite(sigma[i])) {
        x = std::log(ts[i]);
        y = std::log(sigma[i]);
        c = 1;
      }
      lx[i + 1] = lx[i] + x;
      ly[i + 1] = ly[i] + y;
      lxx[i + 1] = lxx[i] + x * x;
      lxy[i + 1] = lxy[i] + x * y;
      cnt[i + 1] = cnt[i] + c;
    }
  }

  // least-squares slope over samples with t in [lo, hi]; nullopt if < 20
  std::optional<double> slope(double lo, double hi) const {
    const auto b = std::lower_bound(t.begin(), t.end(), lo) - t.begin();
    const auto e = std::upper_bound(t.begin(), t.end(), hi) - t.begin();
    const int m = cnt[e] - cnt[b];
    if (m < 20) return std::nullopt;
    const double sx = lx[e] - lx[b], sy = ly[e] - ly[b];
    const double sxx = lxx[e] - lxx[b], sxy = lxy[e] - lxy[b];
    const double denom = m * sxx - sx * sx;
    if (denom <= 0.0) return std::nullopt;
    return (m * sxy - sx * sy) / denom;
  }
};

// Last time at which sigma is above the merge floor; 0 when never.
double floor_truncation(std::span<const double> t, std::span<const double> sigma) {
  for (std::size_t i = t.size(); i-- > 0;)
    if (sigma[i] > kMergeFloor && std::isfinite(sigma[i])) return t[i];
  return 0.0;
}

}  // namespace

void phase_dispersion_raw(std::span<const int> values, int dim,
                          std::span<const double> phi, std::span<const double> rho,
                          std::span<double> sigma_out, std::span<double> mean_out) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int a = 0; a < dim; ++a) {
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] == a) total += rho[i];
    if (total <= 0.0) {
      sigma_out[a] = nan;
      mean_out[a] = nan;
      continue;
    }
    std::vector<double> ph, w;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] == a) {
        ph.push_back(phi[i]);
        w.push_back(rho[i] / total);
      }
    const double mean = weighted_circular_mean(ph, w);
    double var = 0.0;
    for (std::size_t k = 0; k < ph.size(); ++k) {
      const double d = wrap_to_pi(ph[k] - mean);
      var += w[k] * d * d;
    }
    sigma_out[a] = std::sqrt(var);
    mean_out[a] = mean;
  }
}

ValueDispersion phase_dispersion(const EnsembleState& s) {
  ValueDispersion out;
  out.sigma.resize(static_cast<std::size_t>(s.dim));
  out.mean.resize(static_cast<std::size_t>(s.dim));
  out.occupied.resize(static_cast<std::size_t>(s.dim));
  std::vector<int> values(s.size());
  std::vector<double> phi(s.size()), rho(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    values[i] = s.entries[i].a;
    phi[i] = s.entries[i].phi;
    rho[i] = s.entries[i].rho;
  }
  phase_dispersion_raw(values, s.dim, phi, rho, out.sigma, out.mean);
  for (int a = 0; a < s.dim; ++a)
    out.occupied[static_cast<std::size_t>(a)] =
        std::isfinite(out.sigma[static_cast<std::size_t>(a)]);
  return out;
}

std::vector<ExponentPoint> convergence_exponent(std::span<const double> t,
                                                std::span<const double> sigma,
                                                int max_points) {
  std::vector<ExponentPoint> out;
  if (t.size() < 2) return out;
  WindowSums sums(t, sigma);
  double t_lo = 0.0, t_hi = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] > 0.0) {
      t_lo = t[i];
      break;
    }
  t_hi = t.back();
  if (!(t_lo > 0.0) || t_hi <= t_lo) return out;

  const double half = 0.5 * kHalfDecade;  // half window, log10
  const double lo_center = std::log10(t_lo) + half;
  const double hi_center = std::log10(t_hi) - half;
  if (hi_center <= lo_center) return out;
  const int points = std::max(2, max_points);
  for (int k = 0; k < points; ++k) {
    const double lc = lo_center + (hi_center - lo_center) * k / (points - 1);
    const double wlo = std::pow(10.0, lc - half);
    const double whi = std::pow(10.0, lc + half);
    if (auto s = sums.slope(wlo, whi))
      out.push_back({std::pow(10.0, lc), *s});
  }
  return out;
}

std::optional<double> exponent_at(std::span<const double> t,
                                  std::span<const double> sigma, double t_end) {
  if (!(t_end > 0.0)) return std::nullopt;
  WindowSums sums(t, sigma);
  return sums.slope(t_end / std::pow(10.0, kHalfDecade), t_end);
}

std::string to_string(RunClass c) {
  switch (c) {
    case RunClass::Converged: return "converged";
    case RunClass::Diverged: return "diverged";
    case RunClass::Marginal: return "marginal";
    case RunClass::Partial: return "partial";
  }
  return "?";
}

std::string to_string(DecayClass c) {
  switch (c) {
    case DecayClass::PowerLaw: return "power_law";
    case DecayClass::Exponential: return "exponential";
    case DecayClass::None: return "none";
  }
  return "?";
}

RunClass classify_convergence(std::span<const double> t,
                              std::span<const double> sigma, double horizon) {
  if (t.empty() || t.back() < horizon * (1.0 - 1e-9))
    throw std::invalid_argument("classify_convergence: series does not reach horizon");

  // Scale references. The trailing-window maxima are insensitive to where a
  // revival cycle happens to sit relative to the horizon; the end value
  // catches runs that collapse late ("converge late", the purple zone).
  double init_scale = 0.0, half_max = 0.0, quarter_max = 0.0;
  double end_value = std::numeric_limits<double>::quiet_NaN();
  const double half_lo = horizon / std::pow(10.0, kHalfDecade);
  const double quarter_lo = horizon / std::pow(10.0, 0.25);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(sigma[i]) || t[i] > horizon) continue;
    if (t[i] <= 0.05 * horizon) init_scale = std::max(init_scale, sigma[i]);
    if (t[i] >= half_lo) half_max = std::max(half_max, sigma[i]);
    if (t[i] >= quarter_lo) quarter_max = std::max(quarter_max, sigma[i]);
    end_value = sigma[i];
  }

  if (half_max <= 1e-10) return RunClass::Converged;  // merged or dead

  const double t_fit = std::min(horizon, floor_truncation(t, sigma));
  const auto n = exponent_at(t, sigma, t_fit);

  // Late collapse: ends far below the initial scale with a steep slope,
  // whatever happened mid-window.
  if (n && *n <= kConvergedSlope && end_value <= 0.005 * init_scale)
    return RunClass::Converged;

  if (half_max >= kDivergedScale) return RunClass::Diverged;

  // Revival: sigma fell and then climbed back toward its earlier scale
  // within the last decade ("jumps away from equilibrium").
  double run_min = std::numeric_limits<double>::infinity();
  double rebound_ratio = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < 0.1 * horizon || t[i] > horizon || !std::isfinite(sigma[i])) continue;
    run_min = std::min(run_min, sigma[i]);
    if (run_min > 0.0) rebound_ratio = std::max(rebound_ratio, sigma[i] / run_min);
  }
  const bool rebounded =
      rebound_ratio >= 2.5 && quarter_max >= 0.15 * init_scale;

  if (!rebounded && n && *n <= kConvergedSlope &&
      quarter_max <= 0.5 * init_scale)
    return RunClass::Converged;
  if (rebounded || quarter_max >= 0.5 * init_scale) {
    // Still decaying slowly from its initial scale is marginal, not diverged.
    if (!rebounded && n && *n < 0.0 && *n > kConvergedSlope)
      return RunClass::Marginal;
    return RunClass::Diverged;
  }
  return RunClass::Marginal;
}

DecayClass decay_class(std::span<const double> t, std::span<const double> sigma,
                       double horizon) {
  const double t_fit = std::min(horizon, floor_truncation(t, sigma));
  if (!(t_fit > 0.0)) return DecayClass::None;
  const auto nh = exponent_at(t, sigma, t_fit);
  if (!nh || *nh > kConvergedSlope) return DecayClass::None;

  // Competing two-parameter fits of ln sigma over the last decade: against
  // ln t (power law) and against t (exponential).
  double sx1 = 0, sx2 = 0, sy = 0, sx1x1 = 0, sx2x2 = 0, sx1y = 0, sx2y = 0;
  int m = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < 0.1 * t_fit || t[i] > t_fit) continue;
    if (!(sigma[i] > 0.0) || !std::isfinite(sigma[i])) continue;
    const double x1 = std::log(t[i]), x2 = t[i], y = std::log(sigma[i]);
    sx1 += x1;
    sx2 += x2;
    sy += y;
    sx1x1 += x1 * x1;
    sx2x2 += x2 * x2;
    sx1y += x1 * y;
    sx2y += x2 * y;
    ++m;
  }
  if (m < 20) return *nh <= -3.0 ? DecayClass::Exponential : DecayClass::PowerLaw;
  // residual sum of squares of y regressed on x, up to the common var(y) term
  auto fit_gain = [m, sy](double sx, double sxx, double sxy) {
    const double cov = sxy - sx * sy / m;
    const double var = sxx - sx * sx / m;
    return var > 0.0 ? cov * cov / var : 0.0;  // explained sum of squares
  };
  const double power_gain = fit_gain(sx1, sx1x1, sx1y);
  const double exp_gain = fit_gain(sx2, sx2x2, sx2y);
  return exp_gain > power_gain ? DecayClass::Exponential : DecayClass::PowerLaw;
}

ConvergenceReport classify_run(const DispersionSeries& series,
                               std::span<const double> value_weights,
                               double horizon, double lambda) {
  ConvergenceReport rep;
  rep.per_value_sigma = series;
  rep.horizon = horizon;
  const std::size_t dim = series.sigma.size();
  rep.exponent_series.resize(dim);
  rep.per_value_class.resize(dim, RunClass::Marginal);
  rep.n_at_horizon.resize(dim);

  for (std::size_t a = 0; a < dim; ++a) {
    rep.exponent_series[a] = convergence_exponent(series.t, series.sigma[a]);
    rep.per_value_class[a] = classify_convergence(series.t, series.sigma[a], horizon);
    const double t_fit =
        std::min(horizon, floor_truncation(series.t, series.sigma[a]));
    rep.n_at_horizon[a] = exponent_at(series.t, series.sigma[a], t_fit);
  }

  // Aggregate: Partial marks the mixed-convergence case ("spin up converges,
  // but spin down does not"); runs with no converged value and at least one
  // diverged value are diverged as a whole.
  bool all_same = true;
  int converged = 0, diverged = 0;
  for (std::size_t a = 0; a < dim; ++a) {
    if (rep.per_value_class[a] != rep.per_value_class[0]) all_same = false;
    converged += rep.per_value_class[a] == RunClass::Converged;
    diverged += rep.per_value_class[a] == RunClass::Diverged;
  }
  if (all_same && dim > 0)
    rep.classification = rep.per_value_class[0];
  else if (converged > 0)
    rep.classification = RunClass::Partial;
  else if (diverged > 0)
    rep.classification = RunClass::Diverged;
  else
    rep.classification = RunClass::Marginal;

  // Decay class of the run: taken from the fastest-converging value (the one
  // whose late-time slope is steepest), which carries the convergence
  // mechanism.
  std::size_t lead = 0;
  double steepest = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t a = 0; a < dim; ++a) {
    if (rep.n_at_horizon[a] && *rep.n_at_horizon[a] < steepest) {
      steepest = *rep.n_at_horizon[a];
      lead = a;
      found = true;
    }
  }
  rep.decay =
      found ? decay_class(series.t, series.sigma[lead], horizon) : DecayClass::None;

  // sigma_fit: invert <phi_tilde^2> = (sigma^2-1)/(1+4/lambda) with
  // phi_tilde = lambda t (phi - <phi>), averaged over the last decade.
  if (lambda > 0.0) {
    double acc = 0.0, wacc = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
      double var_scaled = 0.0;
      int count = 0;
      for (std::size_t k = 0; k < series.t.size(); ++k) {
        if (series.t[k] < 0.1 * horizon || series.t[k] > horizon) continue;
        const double s = series.sigma[a][k];
        if (!std::isfinite(s) || s <= 0.0) continue;
        const double pt = lambda * series.t[k] * s;
        var_scaled += pt * pt;
        ++count;
      }
      if (count == 0) continue;
      var_scaled /= count;
      const double s2 = 1.0 + (1.0 + 4.0 / lambda) * var_scaled;
      if (s2 > 0.0) {
        acc += value_weights[a] * std::sqrt(s2);
        wacc += value_weights[a];
      }
    }
    if (wacc > 0.0) rep.sigma_fit = acc / wacc;
  }
  return rep;
}

std::string report_to_json(const ConvergenceReport& r) {
  nlohmann::json j;
  j["classification"] = to_string(r.classification);
  j["decay_class"] = to_string(r.decay);
  j["horizon"] = r.horizon;
  if (r.sigma_fit) j["sigma_fit"] = *r.sigma_fit;
  auto& pv = j["per_value"];
  pv = nlohmann::json::array();
  for (std::size_t a = 0; a < r.per_value_class.size(); ++a) {
    nlohmann::json v;
    v["a"] = a;
    v["classification"] = to_string(r.per_value_class[a]);
    if (r.n_at_horizon[a]) v["n_at_horizon"] = *r.n_at_horizon[a];
    pv.push_back(v);
  }
  return j.dump(2);
}

std::vector<double> qm_deviation(const Trajectory& traj, const CouplingMatrix& m) {
  std::vector<double> out;
  if (traj.states.empty()) return out;
  const EnsembleState ref0 = collapse_to_equilibrium(traj.states.front());
  std::vector<double> rho0, phi0;
  for (const auto& e : ref0.entries) {
    rho0.push_back(e.rho);
    phi0.push_back(e.phi);
  }
  out.reserve(traj.times.size());
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const auto qm = qm_reference_evolution(m, rho0, phi0, traj.times[k]);
    const auto pv = traj.states[k].value_probabilities();
    double sup = 0.0;
    for (int a = 0; a < m.dim; ++a)
      sup = std::max(sup, std::fabs(pv[static_cast<std::size_t>(a)] -
                                    qm.rho[static_cast<std::size_t>(a)]));
    out.push_back(sup);
  }
  return out;
}

double effective_energy(double h_ii, double var_dphi) {
  return h_ii * (1.0 + var_dphi);
}

double power_spectrum_estimate(double k_over_mp, double t_mp, double var0) {
  const double sqrt3 = std::sqrt(3.0);
  const double vacuum = k_over_mp * k_over_mp / (16.0 * kPi * kPi * sqrt3);
  const double nonequilibrium = sqrt3 * var0 / (8.0 * kPi * kPi * t_mp * t_mp);
  return vacuum + nonequilibrium;
}

double vacuum_energy_estimate(double temperature_tev, double var0) {
  const double t8 = std::pow(temperature_tev, 8.0);
  return 14.0 * std::sqrt(var0) * t8;
}

}  // namespace rens
