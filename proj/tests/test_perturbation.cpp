#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rensemble/errors.hpp"
#include "rensemble/math_util.hpp"
#include "rensemble/perturbation.hpp"

using namespace rens;

TEST_CASE("reduced_rhs_exact examples") {
  SUBCASE("single phase") {
    ReducedState s{{0.7}, {1.0}, 0.0};
    const auto [dphi, dw] = reduced_rhs_exact(s, Kernel::cosine());
    CHECK(dphi[0] == doctest::Approx(1.0));
    CHECK(dw[0] == doctest::Approx(0.0));
  }
  SUBCASE("two opposite phases, flat kernel, symmetric cancellation") {
    ReducedState s{{0.0, kPi}, {0.5, 0.5}, -1.0};
    const auto [dphi, dw] = reduced_rhs_exact(s, Kernel::flat());
    CHECK(dphi[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(dphi[1] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(std::fabs(dw[0]) < 1e-15);
    CHECK(std::fabs(dw[1]) < 1e-15);
  }
  SUBCASE("frozen fixture, cosine kernel") {
    // Long-double direct evaluation of the sums.
    ReducedState s{{0.0, 0.01}, {0.4, 0.6}, -0.75};
    const auto [dphi, dw] = reduced_rhs_exact(s, Kernel::cosine());
    CHECK(dphi[0] == doctest::Approx(0.99997150018312436941).epsilon(1e-14));
    CHECK(dphi[1] == doctest::Approx(0.99997900021374920522).epsilon(1e-14));
    CHECK(dw[0] == doctest::Approx(-0.0047998600018849843605).epsilon(1e-12));
    CHECK(dw[1] == doctest::Approx(0.0047998600018849843605).epsilon(1e-12));
  }
}

TEST_CASE("reduced_rhs_taylor examples") {
  SUBCASE("coincident phases give zero") {
    ReducedState s{{0.3, 0.3, 0.3}, {0.2, 0.5, 0.3}, 2.0};
    const auto [rel, dw] = reduced_rhs_taylor(s);
    for (double x : rel) CHECK(x == doctest::Approx(0.0));
    for (double x : dw) CHECK(x == doctest::Approx(0.0));
  }
  SUBCASE("symmetric spread") {
    ReducedState s{{-0.01, 0.01}, {0.5, 0.5}, 2.0};
    const auto [rel, dw] = reduced_rhs_taylor(s);
    CHECK(rel[0] - rel[1] == doctest::Approx(0.0));
    CHECK(dw[0] == doctest::Approx(-0.01));
    CHECK(dw[1] == doctest::Approx(0.01));
  }
}

TEST_CASE("taylor expansion matches the exact reduced law to fourth order") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const Kernel& k : {Kernel::cosine(), Kernel::spiked(5)}) {
    const double lambda = k.lambda();
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 4;
      ReducedState s;
      s.lambda = lambda;
      double tot = 0.0;
      for (int i = 0; i < n; ++i) {
        s.phi.push_back(1e-3 * u(rng));
        s.w.push_back(1.0 + 0.5 * u(rng));
        tot += s.w.back();
      }
      for (auto& w : s.w) w /= tot;
      const auto [dphi_ex, dw_ex] = reduced_rhs_exact(s, k);
      const auto [rel_ta, dw_ta] = reduced_rhs_taylor(s);
      for (int i = 0; i < n; ++i)
        for (int m = 0; m < n; ++m) {
          const double exact_diff = dphi_ex[i] - dphi_ex[m];
          const double taylor_diff = rel_ta[i] - rel_ta[m];
          CHECK(std::fabs(exact_diff - taylor_diff) < 5e-11);
        }
      for (int i = 0; i < n; ++i) CHECK(std::fabs(dw_ex[i] - dw_ta[i]) < 1e-8);
    }
  }
}

TEST_CASE("fixed points") {
  {
    const auto [plus, minus] = fixed_points(2.0);
    CHECK(plus == doctest::Approx(1.0));
    CHECK(minus == doctest::Approx(-3.0));
  }
  {
    const auto [plus, minus] = fixed_points(1.0);
    CHECK(plus == doctest::Approx(0.0));
    CHECK(minus == doctest::Approx(-2.0));
  }
  {
    const auto [plus, minus] = fixed_points(0.5);
    CHECK(plus == doctest::Approx(-0.5));
    CHECK(minus == doctest::Approx(-1.5));
  }
  CHECK_THROWS_AS(fixed_points(-1.0), std::domain_error);
}

TEST_CASE("flow vanishes at the fixed points and has slopes +-sigma") {
  for (double sigma : {1.5, 2.0, 3.7}) {
    const auto [plus, minus] = fixed_points(sigma);
    CHECK(std::fabs(phi_tilde_flow(plus, sigma)) < 1e-12);
    CHECK(std::fabs(phi_tilde_flow(minus, sigma)) < 1e-12);
    const double h = 1e-6;
    const double slope_plus =
        (phi_tilde_flow(plus + h, sigma) - phi_tilde_flow(plus - h, sigma)) / (2 * h);
    const double slope_minus =
        (phi_tilde_flow(minus + h, sigma) - phi_tilde_flow(minus - h, sigma)) /
        (2 * h);
    CHECK(slope_plus == doctest::Approx(sigma).epsilon(1e-6));
    CHECK(slope_minus == doctest::Approx(-sigma).epsilon(1e-6));
  }
}

TEST_CASE("steady-state parameters and density") {
  const auto p = SteadyStateParams::make(2.0, 2.0);
  CHECK(p.alpha_plus == doctest::Approx(-0.5));
  CHECK(p.alpha_minus == doctest::Approx(0.5));
  CHECK(p.phi_plus == doctest::Approx(1.0));
  CHECK(p.phi_minus == doctest::Approx(-3.0));

  SUBCASE("domain errors") {
    CHECK_THROWS_AS(SteadyStateParams::make(-0.5, 2.0), std::domain_error);
    CHECK_THROWS_AS(steady_state_density(p, 1.5), std::domain_error);
    CHECK_THROWS_AS(steady_state_density(p, -3.0), std::domain_error);
  }

  SUBCASE("alpha exponents exceed -1 for positive lambda") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ul(0.05, 50.0), us(1.01, 10.0);
    for (int i = 0; i < 200; ++i) {
      const auto q = SteadyStateParams::make(ul(rng), us(rng));
      CHECK(q.alpha_plus > -1.0);
      CHECK(q.alpha_minus > -1.0);
    }
  }

  SUBCASE("normalized density has mean zero and the predicted variance") {
    for (auto [lambda, sigma] : {std::pair{2.0, 2.0}, std::pair{4.0, 3.0},
                                 std::pair{0.5, 1.2}, std::pair{30.0, 5.0}}) {
      const auto q = SteadyStateParams::make(lambda, sigma);
      CHECK(std::fabs(steady_state_moment(q, 1)) < 1e-8);
      CHECK(steady_state_moment(q, 2) ==
            doctest::Approx(variance_prediction(lambda, sigma)).epsilon(1e-8));
    }
  }

  SUBCASE("normalization matches the closed form for lambda = sigma = 2") {
    // alpha = (-1/2, 1/2): integral of the density over the support is
    // 2 sigma B(3/2, 1/2) = 2 * 2 * pi/2 = 2 pi.
    CHECK(steady_state_normalization(p) == doctest::Approx(kTwoPi).epsilon(1e-10));
  }
}

TEST_CASE("variance prediction") {
  CHECK(variance_prediction(2.0, 2.0) == doctest::Approx(1.0));
  CHECK(variance_prediction(4.0, 3.0) == doctest::Approx(4.0));
  CHECK(variance_prediction(2.5, 1.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(variance_prediction(-4.0, 2.0), std::domain_error);
}

TEST_CASE("static solution for negative lambda") {
  CHECK(static_density_exponent(-0.75) == doctest::Approx(4.0 / -0.75 - 2.0));
  CHECK(static_cutoff_variance(-0.5, 1e-3) ==
        doctest::Approx((-4.5) / (-3.5) * 1e-6).epsilon(1e-12));
  CHECK(static_cutoff_variance(-0.5, 0.0) == 0.0);
  CHECK_THROWS_AS(static_density_exponent(0.5), std::domain_error);
  CHECK_THROWS_AS(static_density_exponent(-1.5), std::domain_error);
}

TEST_CASE("moment hierarchy right-hand side") {
  SUBCASE("m = 1 is identically zero for centered moments") {
    std::map<int, double> m{{0, 1.0}, {2, 3e-4}};
    CHECK(moment_hierarchy_rhs(m, 1.7, 1) == doctest::Approx(0.0));
  }
  SUBCASE("m = 2 arithmetic") {
    std::map<int, double> m{{1, 0.0}, {2, 1e-3}, {3, 1e-6}};
    CHECK(moment_hierarchy_rhs(m, 2.0, 2) == doctest::Approx(4e-6));
  }
  SUBCASE("missing moment raises") {
    std::map<int, double> m{{1, 0.0}, {2, 1e-3}};
    CHECK_THROWS_AS(moment_hierarchy_rhs(m, 2.0, 2), std::invalid_argument);
  }
}

TEST_CASE("moment hierarchy with Gaussian closure tracks the reduced ensemble") {
  const Kernel k = Kernel::cosine();
  const double lambda = k.lambda();

  // table-style three-phase value in R_aa^-1 units
  ReducedState s;
  s.lambda = lambda;
  s.phi = {0.0, 0.001 * kPi, 0.002 * kPi};
  s.w = {0.16 / 0.3, 0.08 / 0.3, 0.06 / 0.3};

  auto central_moment = [&](const ReducedState& st, int m) {
    double mean = 0.0;
    for (std::size_t i = 0; i < st.phi.size(); ++i) mean += st.w[i] * st.phi[i];
    double acc = 0.0;
    for (std::size_t i = 0; i < st.phi.size(); ++i)
      acc += st.w[i] * std::pow(st.phi[i] - mean, m);
    return acc;
  };

  double m2 = central_moment(s, 2), m3 = central_moment(s, 3),
         m4 = central_moment(s, 4);
  const double m2_0 = m2;

  const double dt = 0.01;
  auto ensemble_step = [&]() {
    // RK4 on the exact reduced law
    const std::size_t n = s.phi.size();
    auto deriv = [&](const ReducedState& st) { return reduced_rhs_exact(st, k); };
    const auto k1 = deriv(s);
    ReducedState t1 = s;
    for (std::size_t i = 0; i < n; ++i) {
      t1.phi[i] += 0.5 * dt * k1.first[i];
      t1.w[i] += 0.5 * dt * k1.second[i];
    }
    const auto k2 = deriv(t1);
    ReducedState t2 = s;
    for (std::size_t i = 0; i < n; ++i) {
      t2.phi[i] += 0.5 * dt * k2.first[i];
      t2.w[i] += 0.5 * dt * k2.second[i];
    }
    const auto k3 = deriv(t2);
    ReducedState t3 = s;
    for (std::size_t i = 0; i < n; ++i) {
      t3.phi[i] += dt * k3.first[i];
      t3.w[i] += dt * k3.second[i];
    }
    const auto k4 = deriv(t3);
    for (std::size_t i = 0; i < n; ++i) {
      s.phi[i] += dt / 6.0 * (k1.first[i] + 2 * k2.first[i] + 2 * k3.first[i] +
                              k4.first[i]);
      s.w[i] += dt / 6.0 * (k1.second[i] + 2 * k2.second[i] + 2 * k3.second[i] +
                            k4.second[i]);
    }
  };

  auto hierarchy_rhs = [&](double v2, double v3, double v4, double& d2, double& d3,
                           double& d4) {
    const double v5 = 10.0 * v2 * v3;  // vanishing fifth cumulant
    std::map<int, double> mm{{0, 1.0}, {1, 0.0}, {2, v2}, {3, v3}, {4, v4}, {5, v5}};
    d2 = moment_hierarchy_rhs(mm, lambda, 2);
    d3 = moment_hierarchy_rhs(mm, lambda, 3);
    d4 = moment_hierarchy_rhs(mm, lambda, 4);
  };
  auto hierarchy_step = [&]() {
    double a2, a3, a4, b2, b3, b4, c2, c3, c4, d2, d3, d4;
    hierarchy_rhs(m2, m3, m4, a2, a3, a4);
    hierarchy_rhs(m2 + 0.5 * dt * a2, m3 + 0.5 * dt * a3, m4 + 0.5 * dt * a4, b2, b3,
                  b4);
    hierarchy_rhs(m2 + 0.5 * dt * b2, m3 + 0.5 * dt * b3, m4 + 0.5 * dt * b4, c2, c3,
                  c4);
    hierarchy_rhs(m2 + dt * c2, m3 + dt * c3, m4 + dt * c4, d2, d3, d4);
    m2 += dt / 6.0 * (a2 + 2 * b2 + 2 * c2 + d2);
    m3 += dt / 6.0 * (a3 + 2 * b3 + 2 * c3 + d3);
    m4 += dt / 6.0 * (a4 + 2 * b4 + 2 * c4 + d4);
  };

  bool reached_efold = false;
  for (int step = 1; step <= 100000; ++step) {
    ensemble_step();
    hierarchy_step();
    const double ens_m2 = central_moment(s, 2);
    if (step % 10 == 0) CHECK(std::fabs(m2 - ens_m2) <= 0.10 * ens_m2);
    if (ens_m2 < m2_0 / std::exp(1.0)) {
      reached_efold = true;
      break;
    }
  }
  CHECK(reached_efold);
}

TEST_CASE("mean phase drift") {
  CHECK(mean_phase_drift(0.0) == doctest::Approx(1.0));
  CHECK(mean_phase_drift(0.01) == doctest::Approx(1.01));
  CHECK_THROWS_AS(mean_phase_drift(-1e-3), std::domain_error);
}

TEST_CASE("steady-state sampler reproduces the quadrature moments") {
  const auto p = SteadyStateParams::make(2.0, 2.0);
  std::mt19937_64 rng(123);
  const int n = 100000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_steady_state(p, rng);
    CHECK(x > p.phi_minus);
    CHECK(x < p.phi_plus);
    s1 += x;
    s2 += x * x;
  }
  s1 /= n;
  s2 /= n;
  const double want_var = steady_state_moment(p, 2);
  CHECK(std::fabs(s1) < 4.0 * std::sqrt(want_var / n));
  CHECK(std::fabs(s2 - want_var) < 0.03 * want_var);
}

TEST_CASE("steady state is stationary under one transport step of the flow") {
  // Samples move by the phi_tilde flow and reweight by the w equation; the
  // weighted empirical CDF must match the original to KS <= 0.01.
  const auto p = SteadyStateParams::make(2.0, 2.0);
  std::mt19937_64 rng(77);
  const int n = 100000;
  std::vector<double> x0(n);
  for (auto& x : x0) x = sample_steady_state(p, rng);
  std::sort(x0.begin(), x0.end());

  const double dtau = 0.01;
  std::vector<std::pair<double, double>> moved(n);  // (position, weight)
  for (int i = 0; i < n; ++i) {
    const double x = x0[i];
    moved[i] = {x + phi_tilde_flow(x, p.sigma) * dtau,
                1.0 + (2.0 / p.lambda) * x * dtau};
  }
  std::sort(moved.begin(), moved.end());
  std::vector<double> wsum(n + 1, 0.0);
  for (int i = 0; i < n; ++i) wsum[i + 1] = wsum[i] + moved[i].second;
  const double total = wsum[n];

  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf0 = (i + 1.0) / n;
    const auto it = std::upper_bound(
        moved.begin(), moved.end(), std::make_pair(x0[i], 1e300));
    const double cdfw = wsum[it - moved.begin()] / total;
    ks = std::max(ks, std::fabs(cdf0 - cdfw));
  }
  CHECK(ks <= 0.01);
}

TEST_CASE("oracle report carries the dichotomy prediction") {
  const auto power = make_oracle_report(2499.0, 2.0);
  CHECK(power.predicted_decay_class == DecayClass::PowerLaw);
  CHECK(power.alpha_plus.has_value());
  const auto expo = make_oracle_report(-0.75, std::nullopt);
  CHECK(expo.predicted_decay_class == DecayClass::Exponential);
  const auto marginal = make_oracle_report(0.0, std::nullopt);
  CHECK(marginal.predicted_decay_class == DecayClass::None);
}
