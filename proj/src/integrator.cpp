#include "rensemble/integrator.hpp"

#include <algorithm>
#include <cmath>

#include "rensemble/errors.hpp"

namespace rens {
namespace {

struct Workspace {
  std::size_t n = 0;
  std::vector<double> phi, rho;          // current coordinates
  std::vector<double> comp_phi, comp_rho;  // Kahan carries for the increments
  std::vector<double> k1p, k1r, k2p, k2r, k3p, k3r, k4p, k4r;
  std::vector<double> tp, tr;            // stage inputs
  std::vector<char> frozen;

  explicit Workspace(const EnsembleState& s) : n(s.size()) {
    phi.resize(n);
    rho.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      phi[i] = s.entries[i].phi;
      rho[i] = s.entries[i].rho;
    }
    comp_phi.assign(n, 0.0);
    comp_rho.assign(n, 0.0);
    for (auto* v : {&k1p, &k1r, &k2p, &k2r, &k3p, &k3r, &k4p, &k4r, &tp, &tr})
      v->resize(n);
    frozen.assign(n, 0);
  }

  // Compensated accumulation: phases advance by tiny relative increments on
  // top of a secular drift, and plain addition quantizes them away at late
  // times (ulp(phi) grows with t). The carry keeps sub-ulp increments alive.
  void apply(const std::vector<double>& inc_phi, const std::vector<double>& inc_rho) {
    for (std::size_t i = 0; i < n; ++i) {
      const double y = inc_phi[i] - comp_phi[i];
      const double t = phi[i] + y;
      comp_phi[i] = (t - phi[i]) - y;
      phi[i] = t;
      const double yr = inc_rho[i] - comp_rho[i];
      const double tr2 = rho[i] + yr;
      comp_rho[i] = (tr2 - rho[i]) - yr;
      rho[i] = tr2;
    }
  }
};

void eval_masked(const RhsFunction& rhs, const std::vector<char>& frozen,
                 std::span<const double> phi, std::span<const double> rho,
                 std::span<double> dphi, std::span<double> drho) {
  rhs(phi, rho, dphi, drho);
  for (std::size_t i = 0; i < frozen.size(); ++i)
    if (frozen[i]) {
      dphi[i] = 0.0;
      drho[i] = 0.0;
    }
}

// One RK4 increment dt/6 (k1 + 2k2 + 2k3 + k4) from the workspace state.
void rk4_increment(const RhsFunction& rhs, Workspace& w, double dt,
                   std::vector<double>& inc_phi, std::vector<double>& inc_rho) {
  const std::size_t n = w.n;
  eval_masked(rhs, w.frozen, w.phi, w.rho, w.k1p, w.k1r);
  for (std::size_t i = 0; i < n; ++i) {
    w.tp[i] = w.phi[i] + 0.5 * dt * w.k1p[i];
    w.tr[i] = w.rho[i] + 0.5 * dt * w.k1r[i];
  }
  eval_masked(rhs, w.frozen, w.tp, w.tr, w.k2p, w.k2r);
  for (std::size_t i = 0; i < n; ++i) {
    w.tp[i] = w.phi[i] + 0.5 * dt * w.k2p[i];
    w.tr[i] = w.rho[i] + 0.5 * dt * w.k2r[i];
  }
  eval_masked(rhs, w.frozen, w.tp, w.tr, w.k3p, w.k3r);
  for (std::size_t i = 0; i < n; ++i) {
    w.tp[i] = w.phi[i] + dt * w.k3p[i];
    w.tr[i] = w.rho[i] + dt * w.k3r[i];
  }
  eval_masked(rhs, w.frozen, w.tp, w.tr, w.k4p, w.k4r);
  inc_phi.resize(n);
  inc_rho.resize(n);
  const double h6 = dt / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    inc_phi[i] = h6 * (w.k1p[i] + 2.0 * w.k2p[i] + 2.0 * w.k3p[i] + w.k4p[i]);
    inc_rho[i] = h6 * (w.k1r[i] + 2.0 * w.k2r[i] + 2.0 * w.k3r[i] + w.k4r[i]);
  }
}

void check_finite(std::span<const double> phi, std::span<const double> rho,
                  double t) {
  for (double x : phi)
    if (!std::isfinite(x))
      throw IntegrationFailure(t, "integration produced non-finite phase at t=" +
                                      std::to_string(t));
  for (double x : rho)
    if (!std::isfinite(x))
      throw IntegrationFailure(
          t, "integration produced non-finite probability at t=" + std::to_string(t));
}

// Renormalize only when drift exceeds the watchdog threshold.
bool maybe_renormalize(std::vector<double>& rho) {
  double total = 0.0;
  for (double r : rho) total += r;
  if (std::fabs(total - 1.0) <= 1e-9) return false;
  for (double& r : rho) r /= total;
  return true;
}

EnsembleState snapshot(const EnsembleState& layout, const Workspace& w) {
  EnsembleState s = layout;
  for (std::size_t i = 0; i < w.n; ++i) {
    s.entries[i].phi = w.phi[i];
    s.entries[i].rho = w.rho[i];
  }
  return s;
}

}  // namespace

EnsembleState step(const EnsembleState& s, const RhsFunction& rhs, double dt,
                   bool* renormalized) {
  if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
  Workspace w(s);
  std::vector<double> ip, ir;
  rk4_increment(rhs, w, dt, ip, ir);
  w.apply(ip, ir);
  check_finite(w.phi, w.rho, dt);
  bool renorm = maybe_renormalize(w.rho);
  if (renormalized) *renormalized = renorm;
  return snapshot(s, w);
}

Trajectory evolve(const EnsembleState& s0, const RhsFunction& rhs,
                  const IntegratorControls& ctl, const StepObserver& observer) {
  if (!(ctl.dt > 0.0) || !(ctl.t_end > 0.0) || !(ctl.tolerance > 0.0) ||
      ctl.snapshot_stride <= 0)
    throw ConfigError("evolve: controls must have dt, t_end, tolerance > 0 and "
                      "snapshot_stride >= 1");

  Workspace w(s0);
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(s0);
  if (observer) observer(0.0, w.phi, w.rho, 0);

  std::vector<double> ip, ir, ip2, ir2;
  Workspace scratch(s0);

  int dim = 0;
  std::vector<int> values(s0.size());
  for (std::size_t i = 0; i < s0.size(); ++i) {
    values[i] = s0.entries[i].a;
    dim = std::max(dim, s0.entries[i].a + 1);
  }
  std::vector<double> value_total(static_cast<std::size_t>(dim));

  // Entries crossing the floor freeze in place. Inside a still-occupied value
  // a frozen entry is pinned to a vanishing positive weight so its
  // kernel-weighted density stays defined; entries of fully empty values stay
  // at exactly zero (zero-occupancy rule).
  auto freeze_pass = [&](Trajectory& tr, bool set_trust) {
    for (std::size_t i = 0; i < w.n; ++i)
      if (!w.frozen[i] && w.rho[i] < ctl.rho_floor) {
        w.frozen[i] = 1;
        if (w.rho[i] < 0.0) w.rho[i] = 0.0;
        if (set_trust) tr.trust_flag = true;
      }
    std::fill(value_total.begin(), value_total.end(), 0.0);
    for (std::size_t i = 0; i < w.n; ++i)
      value_total[static_cast<std::size_t>(values[i])] += w.rho[i];
    for (std::size_t i = 0; i < w.n; ++i)
      if (w.frozen[i] && w.rho[i] <= 0.0 &&
          value_total[static_cast<std::size_t>(values[i])] > ctl.rho_floor)
        w.rho[i] = 1e-300;
  };
  freeze_pass(traj, false);  // entries starting below the floor did not cross it

  const bool fixed = ctl.mode == IntegratorControls::Mode::Fixed;
  double t = 0.0;
  double dt = ctl.dt;
  std::uint64_t accepted = 0;

  const std::uint64_t n_full =
      fixed ? static_cast<std::uint64_t>(std::floor(ctl.t_end / ctl.dt + 1e-9)) : 0;
  const double remainder = fixed ? ctl.t_end - static_cast<double>(n_full) * ctl.dt : 0.0;

  auto accept = [&](double new_t) {
    check_finite(w.phi, w.rho, new_t);
    ++accepted;
    t = new_t;
    if (maybe_renormalize(w.rho)) ++traj.renormalization_count;
    freeze_pass(traj, true);
    if (observer) observer(t, w.phi, w.rho, accepted);
    if (accepted % static_cast<std::uint64_t>(ctl.snapshot_stride) == 0) {
      traj.times.push_back(t);
      traj.states.push_back(snapshot(s0, w));
    }
  };

  if (fixed) {
    for (std::uint64_t k = 0; k < n_full; ++k) {
      rk4_increment(rhs, w, ctl.dt, ip, ir);
      w.apply(ip, ir);
      accept(static_cast<double>(k + 1) * ctl.dt);
    }
    if (remainder > 1e-12 * ctl.dt) {
      rk4_increment(rhs, w, remainder, ip, ir);
      w.apply(ip, ir);
      accept(ctl.t_end);
    }
  } else {
    while (t < ctl.t_end - 1e-12 * ctl.t_end) {
      dt = std::min(dt, ctl.t_end - t);
      if (dt < 1e-12)
        throw IntegrationFailure(
            t, "adaptive step collapsed below 1e-12 at t=" + std::to_string(t) +
                   " (stiffness)");
      // Full step vs two half steps; Richardson error estimate for RK4.
      rk4_increment(rhs, w, dt, ip, ir);
      scratch.phi = w.phi;
      scratch.rho = w.rho;
      scratch.frozen = w.frozen;
      rk4_increment(rhs, scratch, 0.5 * dt, ip2, ir2);
      for (std::size_t i = 0; i < w.n; ++i) {
        scratch.phi[i] += ip2[i];
        scratch.rho[i] += ir2[i];
      }
      std::vector<double> ip3, ir3;
      rk4_increment(rhs, scratch, 0.5 * dt, ip3, ir3);
      for (std::size_t i = 0; i < w.n; ++i) {
        ip2[i] += ip3[i];
        ir2[i] += ir3[i];
      }

      double err = 0.0;
      for (std::size_t i = 0; i < w.n; ++i) {
        const double sp = std::max(std::fabs(w.phi[i]), 1.0);
        const double sr = std::max(std::fabs(w.rho[i]), 1e-6);
        err = std::max(err, std::fabs(ip[i] - ip2[i]) / 15.0 / sp);
        err = std::max(err, std::fabs(ir[i] - ir2[i]) / 15.0 / sr);
      }
      if (err <= ctl.tolerance) {
        w.apply(ip2, ir2);  // keep the more accurate two-half-step increment
        accept(t + dt);
        const double grow =
            err > 0.0 ? 0.9 * std::pow(ctl.tolerance / err, 0.2) : 2.0;
        dt *= std::clamp(grow, 0.5, 2.0);
      } else {
        ++traj.rejected_steps;
        dt *= std::clamp(0.9 * std::pow(ctl.tolerance / err, 0.25), 0.1, 0.9);
      }
    }
  }

  traj.accepted_steps = accepted;
  if (traj.times.back() != t) {
    traj.times.push_back(t);
    traj.states.push_back(snapshot(s0, w));
  }
  return traj;
}

}  // namespace rens
