#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ti64/kinetics.hpp"

#include <cmath>
#include <random>

using namespace ti64;

namespace {
const DiffusionParams kDiff{};
const EquilibriumParams kEq{};
const CharacteristicTemperatures kTemps{};
}  // namespace

TEST_CASE("logistic rate coefficient values") {
  CHECK(k_alpha_s(293.0, kDiff) == doctest::Approx(2.071328768026e-9).epsilon(1e-10));
  CHECK(k_alpha_s(800.0, kDiff) == doctest::Approx(0.0459917491915643).epsilon(1e-12));
  CHECK(k_alpha_s(850.0, kDiff) == doctest::Approx(0.147).epsilon(1e-12));  // midpoint
  CHECK(k_beta(293.0, kDiff) == doctest::Approx(7.871049318500e-9).epsilon(1e-10));
  // saturation and floor
  CHECK(k_alpha_s(2000.0, kDiff) == doctest::Approx(kDiff.k1).epsilon(1e-9));
  CHECK(k_alpha_s(50.0, kDiff) > 0.0);
}

TEST_CASE("logistic coefficient is strictly increasing and bounded") {
  double prev = 0.0;
  for (double t = 100.0; t <= 2000.0; t += 5.0) {
    const double k = k_alpha_s(t, kDiff);
    CHECK(k >= prev);  // saturates to k1 within double precision at high T
    CHECK(k <= kDiff.k1);
    prev = k;
  }
}

TEST_CASE("formation rate beta -> alpha_s") {
  PhaseState s{0.5, 0.0, 0.5, 0.0};
  // drive fixed at 0.4 by choosing x_beta_eq = 0.1
  CHECK(rate_beta_to_alpha_s(s, 800.0, kDiff, 0.1) ==
        doctest::Approx(8.41589592248e-3).epsilon(1e-10));
  // no drive -> no rate
  CHECK(rate_beta_to_alpha_s(s, 800.0, kDiff, 0.5) == 0.0);
  CHECK(rate_beta_to_alpha_s(s, 800.0, kDiff, 0.9) == 0.0);
  // nucleation barrier: zero alpha_s stalls the power law
  PhaseState bare{0.0, 0.0, 1.0, 0.0};
  CHECK(rate_beta_to_alpha_s(bare, 800.0, kDiff, 0.1) == 0.0);
}

TEST_CASE("martensite dissolution mirrors formation with the same drive") {
  // with x_alpha_m equal to the formation drive the two share the power law
  PhaseState s{0.5, 0.4, 0.1, 0.0};
  const double form = rate_beta_to_alpha_s({0.5, 0.0, 0.5, 0.0}, 800.0, kDiff, 0.1);
  CHECK(rate_am_to_alpha_s(s, 800.0, kDiff) == doctest::Approx(form).epsilon(1e-12));
  CHECK(rate_am_to_alpha_s({0.5, 0.0, 0.5, 0.0}, 800.0, kDiff) == 0.0);
}

TEST_CASE("dissolution rate alpha_s -> beta") {
  PhaseState s{0.8, 0.0, 0.2, 0.0};
  const double x_alpha_eq = alpha_equilibrium(1100.0, kEq, kTemps);
  CHECK(rate_alpha_s_to_beta(s, 1100.0, kDiff, x_alpha_eq) ==
        doctest::Approx(0.0121952961026).epsilon(1e-9));
  // no dissolution below equilibrium
  CHECK(rate_alpha_s_to_beta({0.5, 0.0, 0.5, 0.0}, 1100.0, kDiff, x_alpha_eq) == 0.0);
  // corrected beta fraction clamps at 0.1
  CHECK(rate_alpha_s_to_beta({0.95, 0.0, 0.05, 0.0}, 1100.0, kDiff, x_alpha_eq) == 0.0);
}

TEST_CASE("combined rates are nonnegative and finite over random states") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> temp(250.0, 2000.0);
  for (int i = 0; i < 5000; ++i) {
    double as = u(rng), am = u(rng);
    const double tot = as + am;
    if (tot > 0.9) {
      as *= 0.9 / tot;
      am *= 0.9 / tot;
    }
    const PhaseState s{as, am, 1.0 - as - am, 0.0};
    const TransformationRates r = transformation_rates(s, temp(rng), kDiff, kEq, kTemps);
    CHECK(r.beta_to_as >= 0.0);
    CHECK(r.am_to_as >= 0.0);
    CHECK(r.as_to_beta >= 0.0);
    CHECK(std::isfinite(r.beta_to_as));
    CHECK(std::isfinite(r.am_to_as));
    CHECK(std::isfinite(r.as_to_beta));
  }
}

TEST_CASE("formation and dissolution are mutually exclusive") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 0.9);
  std::uniform_real_distribution<double> temp(300.0, 1400.0);
  for (int i = 0; i < 2000; ++i) {
    const double as = u(rng);
    const PhaseState s{as, 0.0, 1.0 - as, 0.0};
    const TransformationRates r = transformation_rates(s, temp(rng), kDiff, kEq, kTemps);
    CHECK((r.beta_to_as == 0.0 || r.as_to_beta == 0.0));
  }
}

TEST_CASE("parameter validation rejects out-of-range values") {
  DiffusionParams p = kDiff;
  p.c_alpha_s = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = kDiff;
  p.k1 = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = kDiff;
  p.f = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  kDiff.validate();  // defaults are fine
}
