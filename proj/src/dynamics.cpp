#include "rensemble/dynamics.hpp"

#include <cmath>

#include "rensemble/errors.hpp"
#include "rensemble/math_util.hpp"

namespace rens {

double rho_tilde(const EnsembleState& s, const Kernel& k, std::size_t i) {
  const auto& ei = s.entries[i];
  double sum = 0.0;
  for (const auto& ej : s.entries)
    if (ej.a == ei.a) sum += ej.rho * k(ei.phi - ej.phi);
  return sum;
}

RhsEvaluator::RhsEvaluator(const CouplingMatrix& m, const Kernel& k,
                           EvolutionModel model, const EnsembleState& layout,
                           bool inert_empty_entries)
    : model_(model), kernel_(k), dim_(m.dim), inert_empty_(inert_empty_entries) {
  {
    auto problems = validate_coupling(m);
    if (!problems.empty()) throw ConfigError(problems);
  }
  if (layout.dim != m.dim)
    throw ConfigError("rhs: state dim does not match coupling dim");

  values_.reserve(layout.size());
  groups_.assign(static_cast<std::size_t>(dim_), {});
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const int a = layout.entries[i].a;
    if (a < 0 || a >= dim_) throw ConfigError("rhs: entry value index out of range");
    values_.push_back(a);
    groups_[static_cast<std::size_t>(a)].push_back(static_cast<int>(i));
  }

  // Trig of beta is fixed per value pair; the diagonal is snapped to the exact
  // 0/pi values so pair flows cancel exactly.
  const std::size_t nn = static_cast<std::size_t>(dim_) * dim_;
  coup_r_.resize(nn);
  coup_cb_.resize(nn);
  coup_sb_.resize(nn);
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b) {
      const std::size_t idx = static_cast<std::size_t>(a) * dim_ + b;
      coup_r_[idx] = m.r(a, b);
      if (a == b) {
        coup_cb_[idx] = std::fabs(wrap_to_pi(m.b(a, a))) < 1.5 ? 1.0 : -1.0;
        coup_sb_[idx] = 0.0;
      } else {
        coup_cb_[idx] = std::cos(m.b(a, b));
        coup_sb_[idx] = std::sin(m.b(a, b));
      }
    }

  rho_a_.resize(static_cast<std::size_t>(dim_));
  rho_tilde_.resize(layout.size());
  sqrt_rt_.resize(layout.size());
  pref_.resize(layout.size());
  alive_.resize(layout.size());
}

void RhsEvaluator::operator()(std::span<const double> phi,
                              std::span<const double> rho, std::span<double> dphi,
                              std::span<double> drho) const {
  const std::size_t n = values_.size();

  // Densities use rho clamped at zero; integrator stage values may undershoot.
  auto density = [&rho](std::size_t i) { return rho[i] > 0.0 ? rho[i] : 0.0; };

  for (int a = 0; a < dim_; ++a) rho_a_[static_cast<std::size_t>(a)] = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    rho_a_[static_cast<std::size_t>(values_[i])] += density(i);

  // Per-entry kernel-weighted density; F(0) = 1 gives the self term.
  for (std::size_t i = 0; i < n; ++i) rho_tilde_[i] = density(i);
  for (int a = 0; a < dim_; ++a) {
    const auto& g = groups_[static_cast<std::size_t>(a)];
    if (rho_a_[static_cast<std::size_t>(a)] <= 0.0) continue;
    for (std::size_t u = 0; u < g.size(); ++u) {
      const int i = g[u];
      for (std::size_t v = u + 1; v < g.size(); ++v) {
        const int j = g[v];
        const double f = kernel_(phi[i] - phi[j]);
        rho_tilde_[i] += density(static_cast<std::size_t>(j)) * f;
        rho_tilde_[j] += density(static_cast<std::size_t>(i)) * f;
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double ra = rho_a_[static_cast<std::size_t>(values_[i])];
    if (ra <= 0.0) {
      alive_[i] = 0;
      sqrt_rt_[i] = 0.0;
      pref_[i] = 0.0;
      continue;
    }
    if (rho_tilde_[i] <= 0.0) {
      if (inert_empty_ && rho[i] <= 0.0) {
        alive_[i] = 0;
        sqrt_rt_[i] = 0.0;
        pref_[i] = 0.0;
        continue;
      }
      throw SingularConfiguration(
          values_[i], "rhs: occupied observable value " + std::to_string(values_[i]) +
                          " has vanishing kernel-weighted density");
    }
    alive_[i] = 1;
    sqrt_rt_[i] = std::sqrt(rho_tilde_[i]);
    pref_[i] = (model_ == EvolutionModel::A) ? rho[i] / ra : rho[i];
  }

  for (std::size_t i = 0; i < n; ++i) {
    dphi[i] = 0.0;
    drho[i] = 0.0;
  }

  // Self terms: cos(beta_aa) = +-1 contributes to dphi, sin(beta_aa) = 0.
  for (std::size_t i = 0; i < n; ++i) {
    if (!alive_[i]) continue;
    const int a = values_[i];
    const std::size_t ab = static_cast<std::size_t>(a) * dim_ + a;
    if (model_ == EvolutionModel::A)
      dphi[i] += pref_[i] * coup_r_[ab] * coup_cb_[ab];
    else
      dphi[i] += rho[i] / rho_tilde_[i] * coup_r_[ab] * coup_cb_[ab];
  }

  // Unordered pairs, evaluated once. The trig uses |d| plus an explicit sign
  // so the phi -> -phi, beta -> -beta reversal maps the result exactly.
  for (std::size_t i = 0; i < n; ++i) {
    if (!alive_[i]) continue;
    const int ai = values_[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const int aj = values_[j];
      if (!alive_[j]) continue;
      const std::size_t ab = static_cast<std::size_t>(ai) * dim_ + aj;
      const double r = coup_r_[ab];
      if (r == 0.0) continue;
      const double d = phi[i] - phi[j];
      const double ad = std::fabs(d);
      const double sign = d < 0.0 ? -1.0 : 1.0;
      const double cd = std::cos(ad);
      const double sd = sign * std::sin(ad);
      const double cb = coup_cb_[ab], sb = coup_sb_[ab];
      const double cosx = cd * cb - sd * sb;  // cos(phi_i - phi_j + beta_ij)
      const double sinx = sd * cb + cd * sb;  // sin(phi_i - phi_j + beta_ij)

      if (model_ == EvolutionModel::A) {
        dphi[i] += pref_[j] * (sqrt_rt_[j] / sqrt_rt_[i]) * r * cosx;
        dphi[j] += pref_[i] * (sqrt_rt_[i] / sqrt_rt_[j]) * r * cosx;
        const double flow =
            pref_[i] * pref_[j] * sqrt_rt_[i] * sqrt_rt_[j] * 2.0 * r * sinx;
        drho[i] += flow;
        drho[j] -= flow;
      } else {
        const double inv = 1.0 / (sqrt_rt_[i] * sqrt_rt_[j]);
        dphi[i] += rho[j] * inv * r * cosx;
        dphi[j] += rho[i] * inv * r * cosx;
        const double flow = rho[i] * rho[j] * inv * 2.0 * r * sinx;
        drho[i] += flow;
        drho[j] -= flow;
      }
    }
  }
}

namespace {
Derivatives run_rhs(const EnsembleState& s, const CouplingMatrix& m, const Kernel& k,
                    EvolutionModel model) {
  RhsEvaluator eval(m, k, model, s);
  const std::size_t n = s.size();
  std::vector<double> phi(n), rho(n);
  for (std::size_t i = 0; i < n; ++i) {
    phi[i] = s.entries[i].phi;
    rho[i] = s.entries[i].rho;
  }
  Derivatives d;
  d.dphi.resize(n);
  d.drho.resize(n);
  eval(phi, rho, d.dphi, d.drho);
  return d;
}
}  // namespace

Derivatives rhs_model_a(const EnsembleState& s, const CouplingMatrix& m,
                        const Kernel& k) {
  return run_rhs(s, m, k, EvolutionModel::A);
}

Derivatives rhs_model_b(const EnsembleState& s, const CouplingMatrix& m,
                        const Kernel& k) {
  return run_rhs(s, m, k, EvolutionModel::B);
}

}  // namespace rens
