#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rensemble/errors.hpp"
#include "rensemble/kernel.hpp"
#include "rensemble/math_util.hpp"

using namespace rens;

TEST_CASE("eval examples") {
  CHECK(Kernel::cosine()(kPi) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(Kernel::spiked(100)(kPi / 200) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(Kernel::spiked(100)(0.1) == 0.0);
  CHECK(Kernel::flat()(2.9) == 1.0);
}

TEST_CASE("kernel bound, unit at zero, evenness, periodicity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  const Kernel kernels[] = {Kernel::flat(), Kernel::cosine(), Kernel::spiked(2),
                            Kernel::spiked(100), Kernel::spiked(0.5)};
  for (const auto& k : kernels) {
    CHECK(k(0.0) == 1.0);
    for (int i = 0; i < 2000; ++i) {
      const double x = u(rng);
      const double f = k(x);
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
      CHECK(k(-x) == f);  // exact by construction
      CHECK(k(x + kTwoPi) == doctest::Approx(f).epsilon(1e-9));
    }
  }
}

TEST_CASE("spiked(1) coincides with cosine exactly on a 4096-point grid") {
  const Kernel s1 = Kernel::spiked(1.0);
  const Kernel cos_k = Kernel::cosine();
  double max_diff = 0.0;
  for (int i = 0; i < 4096; ++i) {
    const double x = -kPi + kTwoPi * (i + 1) / 4096;
    max_diff = std::max(max_diff, std::fabs(s1(x) - cos_k(x)));
  }
  CHECK(max_diff == 0.0);
}

TEST_CASE("curvature closed forms") {
  SUBCASE("flat") {
    auto [inv_sq, lambda] = Kernel::flat().curvature();
    CHECK(inv_sq == 0.0);
    CHECK(lambda == -1.0);
  }
  SUBCASE("cosine") {
    auto [inv_sq, lambda] = Kernel::cosine().curvature();
    CHECK(inv_sq == doctest::Approx(0.25));
    CHECK(lambda == doctest::Approx(-0.75));
  }
  SUBCASE("spiked(2) is marginal") {
    CHECK(Kernel::spiked(2).lambda() == doctest::Approx(0.0));
  }
  SUBCASE("spiked(100)") {
    CHECK(Kernel::spiked(100).lambda() == doctest::Approx(2499.0));
  }
}

TEST_CASE("curvature matches a finite-difference estimate of -F''(0)/2") {
  for (double c : {1.0, 2.0, 5.0, 25.0, 100.0}) {
    const Kernel k = Kernel::spiked(c);
    const double h = 1e-3 / c;  // keeps the truncation error ~h^2 c^2/6 below 1e-6
    const double fd = -0.5 * (k(h) - 2.0 * k(0.0) + k(-h)) / (h * h);
    const auto [inv_sq, lambda] = k.curvature();
    CHECK(inv_sq == doctest::Approx(fd).epsilon(1e-6));
    CHECK(lambda == doctest::Approx(inv_sq - 1.0));
  }
}

TEST_CASE("validate_kernel") {
  SUBCASE("named kernels pass") {
    CHECK(validate_kernel(Kernel::cosine()).empty());
    CHECK(validate_kernel(Kernel::flat()).empty());
    CHECK(validate_kernel(Kernel::spiked(100)).empty());
  }
  SUBCASE("tabulated with F(0) = 0.9") {
    const auto k = Kernel::tabulated({{0.0, 0.9}, {1.0, 0.5}, {kPi, 0.0}});
    const auto v = validate_kernel(k);
    REQUIRE(!v.empty());
    bool found = false;
    for (const auto& viol : v)
      if (viol.invariant == "unit_at_zero") found = true;
    CHECK(found);
  }
  SUBCASE("asymmetric tabulated grid violates evenness") {
    const auto k = Kernel::tabulated(
        {{-kPi, 0.0}, {-1.0, 0.2}, {0.0, 1.0}, {1.0, 0.6}, {kPi, 0.0}});
    bool found = false;
    for (const auto& viol : validate_kernel(k))
      if (viol.invariant == "even") found = true;
    CHECK(found);
  }
}

TEST_CASE("tabulated kernel interpolates and reports curvature") {
  // sample the cosine kernel densely near zero
  std::vector<std::pair<double, double>> grid;
  for (double x = 0.0; x < 1e-2; x += 2e-4) grid.push_back({x, std::pow(std::cos(0.5 * x), 2)});
  for (double x = 1e-2; x < kPi; x += 1e-2)
    grid.push_back({x, std::pow(std::cos(0.5 * x), 2)});
  grid.push_back({kPi, std::pow(std::cos(0.5 * kPi), 2)});
  const auto k = Kernel::tabulated(grid);
  CHECK(validate_kernel(k).empty());
  CHECK(k(0.5) == doctest::Approx(std::pow(std::cos(0.25), 2)).epsilon(1e-4));
  const auto [inv_sq, lambda] = k.curvature();
  CHECK(inv_sq == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(lambda == doctest::Approx(-0.75).epsilon(1e-2));
}

TEST_CASE("tabulated grid too coarse near zero is rejected for curvature") {
  const auto k = Kernel::tabulated({{0.0, 1.0}, {0.1, 0.99}, {kPi, 0.0}});
  CHECK_THROWS_AS(k.curvature(), ConfigError);
}

TEST_CASE("tabulated constructor rejects malformed grids") {
  CHECK_THROWS_AS(Kernel::tabulated({{0.0, 1.0}}), ConfigError);
  CHECK_THROWS_AS(Kernel::tabulated({{0.0, 1.0}, {0.5, -0.2}, {kPi, 0.0}}),
                  ConfigError);
  CHECK_THROWS_AS(Kernel::tabulated({{0.0, 1.0}, {0.5, 1.4}, {kPi, 0.0}}),
                  ConfigError);
  CHECK_THROWS_AS(Kernel::tabulated({{0.0, 1.0}, {1.0, 0.5}}), ConfigError);
}

TEST_CASE("parse_kernel_spec") {
  CHECK(parse_kernel_spec("flat").variant() == Kernel::Variant::Flat);
  CHECK(parse_kernel_spec("cosine").variant() == Kernel::Variant::Cosine);
  const auto s = parse_kernel_spec("spiked:25");
  CHECK(s.variant() == Kernel::Variant::Spiked);
  CHECK(s.spike_width() == doctest::Approx(25.0));
  CHECK_THROWS_AS(parse_kernel_spec("gauss"), ConfigError);
  CHECK_THROWS_AS(parse_kernel_spec("spiked:x"), ConfigError);
  CHECK_THROWS_AS(parse_kernel_spec("spiked:-3"), ConfigError);
}
