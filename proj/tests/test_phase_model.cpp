#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ti64/phase_model.hpp"

#include <cmath>
#include <random>

using namespace ti64;

namespace {
const CharacteristicTemperatures kTemps{};
const EquilibriumParams kEq{};
}  // namespace

TEST_CASE("alpha equilibrium piecewise values") {
  CHECK(alpha_equilibrium(293.15, kEq, kTemps) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(alpha_equilibrium(848.0, kEq, kTemps) == doctest::Approx(0.9).epsilon(1e-12));
  // at t_as_end the exponential branch sits 4.2e-4 under the clamp
  CHECK(alpha_equilibrium(935.0, kEq, kTemps) ==
        doctest::Approx(1.0 - std::exp(-0.0068 * (1273.0 - 935.0))).epsilon(1e-14));
  // Koistinen-Marburger branch between 935 K and 1273 K
  CHECK(alpha_equilibrium(1100.0, kEq, kTemps) ==
        doctest::Approx(0.691613064382127).epsilon(1e-12));
  CHECK(alpha_equilibrium(1273.0, kEq, kTemps) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(alpha_equilibrium(1500.0, kEq, kTemps) == 0.0);
  CHECK(alpha_equilibrium(2000.0, kEq, kTemps) == 0.0);
}

TEST_CASE("beta equilibrium is the complement of alpha") {
  for (double t : {300.0, 700.0, 935.0, 1000.0, 1100.0, 1273.0, 1500.0}) {
    CHECK(beta_equilibrium(t, kEq, kTemps) ==
          doctest::Approx(1.0 - alpha_equilibrium(t, kEq, kTemps)).epsilon(1e-14));
  }
  CHECK(beta_equilibrium(1000.0, kEq, kTemps) ==
        doctest::Approx(0.156234061808).epsilon(1e-10));
  CHECK(beta_equilibrium(1100.0, kEq, kTemps) ==
        doctest::Approx(0.308386935617873).epsilon(1e-12));
}

TEST_CASE("martensite pseudo equilibrium base") {
  CHECK(martensite_pseudo_eq_base(293.15, kEq, kTemps) ==
        doctest::Approx(0.9).epsilon(1e-3));  // capped at x_max
  CHECK(martensite_pseudo_eq_base(500.0, kEq, kTemps) ==
        doctest::Approx(0.764065251124026).epsilon(1e-12));
  CHECK(martensite_pseudo_eq_base(848.0, kEq, kTemps) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(martensite_pseudo_eq_base(900.0, kEq, kTemps) == 0.0);
}

TEST_CASE("martensite pseudo equilibrium shrinks with existing alpha_s") {
  CHECK(martensite_pseudo_eq(500.0, 0.45, kEq, kTemps) ==
        doctest::Approx(0.382032625562013).epsilon(1e-12));
  CHECK(martensite_pseudo_eq(500.0, 0.0, kEq, kTemps) ==
        doctest::Approx(martensite_pseudo_eq_base(500.0, kEq, kTemps)).epsilon(1e-14));
  CHECK(martensite_pseudo_eq(500.0, 0.9, kEq, kTemps) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(martensite_pseudo_eq(600.0, 0.0, kEq, kTemps) ==
        doctest::Approx(0.642707319590).epsilon(1e-10));
}

TEST_CASE("equilibria are continuous across the breakpoints") {
  const double eps = 1e-6;
  for (double bp : {kTemps.t_am_sta, kTemps.t_as_end, kTemps.t_as_sta}) {
    CHECK(alpha_equilibrium(bp - eps, kEq, kTemps) ==
          doctest::Approx(alpha_equilibrium(bp + eps, kEq, kTemps)).epsilon(5e-4));
    CHECK(martensite_pseudo_eq_base(bp - eps, kEq, kTemps) ==
          doctest::Approx(martensite_pseudo_eq_base(bp + eps, kEq, kTemps)).epsilon(1e-4));
  }
}

TEST_CASE("equilibria stay inside [0, x_max] over random temperatures") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> temp(200.0, 2100.0);
  for (int i = 0; i < 2000; ++i) {
    const double t = temp(rng);
    const double a = alpha_equilibrium(t, kEq, kTemps);
    const double m = martensite_pseudo_eq_base(t, kEq, kTemps);
    CHECK(a >= 0.0);
    CHECK(a <= kEq.x_max + 1e-15);
    CHECK(m >= 0.0);
    CHECK(m <= kEq.x_max + 1e-15);
    CHECK(std::isfinite(a));
    CHECK(std::isfinite(m));
  }
}

TEST_CASE("alpha equilibrium is nonincreasing in temperature") {
  double prev = alpha_equilibrium(250.0, kEq, kTemps);
  for (double t = 251.0; t <= 2000.0; t += 1.0) {
    const double cur = alpha_equilibrium(t, kEq, kTemps);
    CHECK(cur <= prev + 1e-14);
    prev = cur;
  }
}

TEST_CASE("solid fraction across the mushy zone") {
  CHECK(solid_fraction(1800.0, kTemps) == 1.0);
  CHECK(solid_fraction(1878.0, kTemps) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(solid_fraction(1903.0, kTemps) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(solid_fraction(1928.0, kTemps) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(solid_fraction(2000.0, kTemps) == 0.0);
}

TEST_CASE("phase state factories") {
  const PhaseState b = PhaseState::pure_beta();
  CHECK(b.x_beta == 1.0);
  CHECK(b.x_alpha_s == 0.0);
  CHECK(b.x_alpha_m == 0.0);
  CHECK(b.x_liq == 0.0);
  const PhaseState l = PhaseState::pure_liquid();
  CHECK(l.x_liq == 1.0);
  CHECK(l.x_beta == 0.0);
}
