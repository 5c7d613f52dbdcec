#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "rensemble/dynamics.hpp"
#include "rensemble/errors.hpp"
#include "rensemble/integrator.hpp"
#include "rensemble/math_util.hpp"

using namespace rens;

namespace {

EnsembleState table1_state() {
  return make_state({{0.16, 0.08, 0.06}, {0.23, 0.3, 0.17}},
                    {{0.0, 0.001 * kPi, 0.002 * kPi},
                     {kPi / 2 + 0.001 * kPi, kPi / 2, kPi / 2 + 0.0005 * kPi}});
}

RhsFunction make_rhs(const CouplingMatrix& m, const Kernel& k, EvolutionModel model,
                     const EnsembleState& layout) {
  auto eval = std::make_shared<RhsEvaluator>(m, k, model, layout, true);
  return [eval](std::span<const double> phi, std::span<const double> rho,
                std::span<double> dphi, std::span<double> drho) {
    (*eval)(phi, rho, dphi, drho);
  };
}

}  // namespace

TEST_CASE("one RK4 step is exact for the linear-in-time diagonal flow") {
  const auto m = pauli_to_coupling({0, 0, 0, 2});
  const auto s = make_state({{0.3}, {0.7}}, {{0.1}, {kPi / 2}});
  const auto rhs = make_rhs(m, Kernel::cosine(), EvolutionModel::A, s);
  for (double dt : {1e-3, 0.05, 0.5}) {
    const auto out = step(s, rhs, dt);
    CHECK(out.entries[0].phi == doctest::Approx(0.1 + 2.0 * dt).epsilon(1e-13));
    CHECK(out.entries[1].phi ==
          doctest::Approx(kPi / 2 - 2.0 * dt).epsilon(1e-13));
  }
}

TEST_CASE("zero drho leaves probabilities bitwise unchanged") {
  const auto m = pauli_to_coupling({0, 0, 0, 2});
  const auto s = make_state({{0.3}, {0.7}}, {{0.1}, {0.4}});
  const auto rhs = make_rhs(m, Kernel::cosine(), EvolutionModel::A, s);
  const auto out = step(s, rhs, 0.01);
  CHECK(out.entries[0].rho == 0.3);
  CHECK(out.entries[1].rho == 0.7);
}

TEST_CASE("Richardson self-convergence is fourth order on the table-1 run") {
  const auto m = pauli_to_coupling({0, 0, 0, 2});
  const auto s0 = table1_state();
  const Kernel k = Kernel::spiked(100);

  auto advance = [&](double dt, int steps) {
    const auto rhs = make_rhs(m, k, EvolutionModel::A, s0);
    EnsembleState s = s0;
    for (int i = 0; i < steps; ++i) s = step(s, rhs, dt);
    return s;
  };

  // error(dt) ~ |x(dt) - x(dt/2, doubled steps)|; ratio ~ 2^4
  auto max_phase_diff = [](const EnsembleState& a, const EnsembleState& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      worst = std::max(worst, std::fabs(a.entries[i].phi - b.entries[i].phi));
    return worst;
  };
  const auto coarse = advance(1e-3, 10);
  const auto mid = advance(5e-4, 20);
  const auto fine = advance(2.5e-4, 40);
  const double e1 = max_phase_diff(coarse, mid);
  const double e2 = max_phase_diff(mid, fine);
  REQUIRE(e2 > 0.0);
  const double ratio = e1 / e2;
  CHECK(ratio > 8.0);
  CHECK(ratio < 32.0);
}

TEST_CASE("diagonal evolution: populations frozen, phases linear") {
  const auto m = pauli_to_coupling({0, 0, 0, 2});
  const auto s0 = make_state({{0.3}, {0.7}}, {{0.0}, {kPi / 2}});
  IntegratorControls ctl;
  ctl.dt = 1e-3;
  ctl.t_end = 10.0;
  ctl.snapshot_stride = 1000;
  const auto traj =
      evolve(s0, make_rhs(m, Kernel::cosine(), EvolutionModel::A, s0), ctl);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    const auto& s = traj.states[k];
    CHECK(std::fabs(s.entries[0].rho - 0.3) < 1e-9);
    CHECK(std::fabs(s.entries[1].rho - 0.7) < 1e-9);
    CHECK(std::fabs(s.entries[0].phi - 2.0 * t) < 1e-8);
    CHECK(std::fabs(s.entries[1].phi - (kPi / 2 - 2.0 * t)) < 1e-8);
  }
  CHECK(traj.renormalization_count == 0);
  CHECK_FALSE(traj.trust_flag);
}

TEST_CASE("equilibrium Rabi tracking against the unitary reference") {
  // The sign convention check: integrating the ensemble law from an
  // equilibrium state reproduces the unitary propagation of
  // sum_a sqrt(rho_a) e^{-i phi_a} |a> in both probabilities and phases.
  const auto m = pauli_to_coupling({0, 1, 0, 0});
  const auto s0 = make_state({{0.3}, {0.7}}, {{0.0}, {0.0}});
  IntegratorControls ctl;
  ctl.dt = 1e-4;
  ctl.t_end = 1.0;
  ctl.snapshot_stride = 1000;
  const auto traj =
      evolve(s0, make_rhs(m, Kernel::cosine(), EvolutionModel::A, s0), ctl);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    const auto qm = qm_reference_evolution(m, std::vector<double>{0.3, 0.7},
                                           std::vector<double>{0.0, 0.0}, t);
    // closed form for this state: rho_0(t) = 0.3 cos^2 t + 0.7 sin^2 t
    const double expect = 0.3 * std::cos(t) * std::cos(t) +
                          0.7 * std::sin(t) * std::sin(t);
    CHECK(std::fabs(qm.rho[0] - expect) < 1e-12);
    const auto& s = traj.states[k];
    CHECK(std::fabs(s.entries[0].rho - qm.rho[0]) < 1e-6);
    CHECK(std::fabs(s.entries[1].rho - qm.rho[1]) < 1e-6);
    CHECK(std::fabs(wrap_to_pi(s.entries[0].phi - qm.phi[0])) < 1e-6);
    CHECK(std::fabs(wrap_to_pi(s.entries[1].phi - qm.phi[1])) < 1e-6);
  }
}

TEST_CASE("probability conservation along a non-equilibrium trajectory") {
  const auto m = pauli_to_coupling({0, 0, 0, 2});
  const auto s0 = table1_state();
  IntegratorControls ctl;
  ctl.dt = 1e-3;
  ctl.t_end = 100.0;
  ctl.snapshot_stride = 100;
  const auto traj =
      evolve(s0, make_rhs(m, Kernel::cosine(), EvolutionModel::A, s0), ctl);
  double worst = 0.0;
  for (const auto& s : traj.states) {
    double total = 0.0;
    for (const auto& e : s.entries) total += e.rho;
    worst = std::max(worst, std::fabs(total - 1.0));
  }
  CHECK(worst <= 1e-8);
  CHECK(traj.renormalization_count == 0);
}

TEST_CASE("time-reversal round trip returns the state") {
  const auto m = pauli_to_coupling({0.3, 0.8, 0.2, 1.1});
  CouplingMatrix rev = m;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) rev.b(a, b) = -m.b(a, b);
  const auto s0 = table1_state();

  const int steps = 100;
  const double dt = 1e-3;
  const auto fwd = make_rhs(m, Kernel::cosine(), EvolutionModel::A, s0);
  EnsembleState s = s0;
  for (int i = 0; i < steps; ++i) s = step(s, fwd, dt);
  for (auto& e : s.entries) e.phi = -e.phi;
  const auto bwd = make_rhs(rev, Kernel::cosine(), EvolutionModel::A, s);
  for (int i = 0; i < steps; ++i) s = step(s, bwd, dt);
  for (auto& e : s.entries) e.phi = -e.phi;

  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(std::fabs(s.entries[i].phi - s0.entries[i].phi) < 1e-10);
    CHECK(std::fabs(s.entries[i].rho - s0.entries[i].rho) < 1e-10);
  }
}

TEST_CASE("adaptive mode reproduces the fixed-step result on a smooth run") {
  const auto m = pauli_to_coupling({0, 1, 0, 1});
  const auto s0 = make_state({{0.3}, {0.7}}, {{0.0}, {kPi / 2}});
  IntegratorControls fixed;
  fixed.dt = 1e-4;
  fixed.t_end = 2.0;
  fixed.snapshot_stride = 20000;
  const auto ref =
      evolve(s0, make_rhs(m, Kernel::cosine(), EvolutionModel::A, s0), fixed);

  IntegratorControls ad = fixed;
  ad.mode = IntegratorControls::Mode::Adaptive;
  ad.dt = 1e-2;
  ad.tolerance = 1e-10;
  ad.snapshot_stride = 1000000;  // final state only
  const auto got =
      evolve(s0, make_rhs(m, Kernel::cosine(), EvolutionModel::A, s0), ad);
  REQUIRE(got.times.back() == doctest::Approx(2.0));
  const auto& a = got.states.back();
  const auto& b = ref.states.back();
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::fabs(a.entries[i].rho - b.entries[i].rho) < 1e-7);
    CHECK(std::fabs(a.entries[i].phi - b.entries[i].phi) < 1e-6);
  }
}

TEST_CASE("non-finite derivatives raise IntegrationFailure with the time") {
  const auto s0 = make_state({{1.0}}, {{0.0}});
  RhsFunction bad = [](std::span<const double>, std::span<const double> rho,
                       std::span<double> dphi, std::span<double> drho) {
    dphi[0] = std::numeric_limits<double>::quiet_NaN();
    drho[0] = 0.0;
    (void)rho;
  };
  IntegratorControls ctl;
  ctl.dt = 0.1;
  ctl.t_end = 1.0;
  CHECK_THROWS_AS(evolve(s0, bad, ctl), IntegrationFailure);
}

TEST_CASE("adaptive step collapse is reported as stiffness") {
  const auto s0 = make_state({{1.0}}, {{0.0}});
  // phase grows explosively; the controller cannot satisfy the tolerance
  RhsFunction explosive = [](std::span<const double> phi, std::span<const double>,
                             std::span<double> dphi, std::span<double> drho) {
    const double p = phi[0];
    dphi[0] = 1e8 * (1.0 + p * p) * (1.0 + std::fabs(std::sin(1e6 * p)));
    drho[0] = 0.0;
  };
  IntegratorControls ctl;
  ctl.mode = IntegratorControls::Mode::Adaptive;
  ctl.dt = 0.1;
  ctl.t_end = 10.0;
  ctl.tolerance = 1e-14;
  CHECK_THROWS_AS(evolve(s0, explosive, ctl), IntegrationFailure);
}

TEST_CASE("rho floor freezes entries and sets the trust flag") {
  const auto s0 = make_state({{1.0 - 5e-14, 5e-14}}, {{0.0, 0.2}});
  RhsFunction drain = [](std::span<const double>, std::span<const double> rho,
                         std::span<double> dphi, std::span<double> drho) {
    dphi[0] = dphi[1] = 0.0;
    drho[1] = -rho[1];  // exponential drain of the tiny entry
    drho[0] = rho[1];
  };
  IntegratorControls ctl;
  ctl.dt = 0.5;
  ctl.t_end = 10.0;
  ctl.snapshot_stride = 1;
  const auto traj = evolve(s0, drain, ctl);
  CHECK(traj.trust_flag);
  const double final_rho = traj.states.back().entries[1].rho;
  CHECK(final_rho >= 0.0);
  CHECK(final_rho < 1e-13);
}

TEST_CASE("zero-occupancy absorption holds along a trajectory") {
  // value 1 starts empty; cross coupling is on, yet it must stay empty.
  EnsembleState s0;
  s0.dim = 2;
  s0.entries = {{0, 0.0, 0.6}, {0, 0.3, 0.4}, {1, 1.0, 0.0}};
  const auto m = pauli_to_coupling({0, 1, 0, 1});
  IntegratorControls ctl;
  ctl.dt = 1e-3;
  ctl.t_end = 5.0;
  ctl.snapshot_stride = 500;
  const auto traj =
      evolve(s0, make_rhs(m, Kernel::cosine(), EvolutionModel::A, s0), ctl);
  for (const auto& st : traj.states) CHECK(st.entries[2].rho == 0.0);
}

TEST_CASE("snapshot stride and fractional final step") {
  const auto m = pauli_to_coupling({0, 0, 0, 2});
  const auto s0 = make_state({{0.3}, {0.7}}, {{0.0}, {0.0}});
  IntegratorControls ctl;
  ctl.dt = 0.3;
  ctl.t_end = 1.0;  // three full steps plus a 0.1 remainder
  ctl.snapshot_stride = 2;
  const auto traj =
      evolve(s0, make_rhs(m, Kernel::cosine(), EvolutionModel::A, s0), ctl);
  REQUIRE(traj.times.front() == 0.0);
  CHECK(traj.times.back() == doctest::Approx(1.0));
  for (std::size_t i = 1; i < traj.times.size(); ++i)
    CHECK(traj.times[i] > traj.times[i - 1]);
  CHECK(traj.states.back().entries[0].phi == doctest::Approx(2.0).epsilon(1e-10));
}
