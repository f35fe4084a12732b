#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ti64/calibrate.hpp"
#include "ti64/levenberg_marquardt.hpp"

#include <cmath>
#include <sstream>

using namespace ti64;

TEST_CASE("LM solves a linear least-squares problem") {
  // residuals r_i = a*x_i + b - y_i with exact solution a=2, b=-1
  const std::vector<double> xs{0.0, 1.0, 2.0, 3.0, 4.0};
  ResidualFn fn = [&](const std::vector<double>& th) {
    std::vector<double> r;
    for (double x : xs) r.push_back(th[0] * x + th[1] - (2.0 * x - 1.0));
    return r;
  };
  const LMResult res = levenberg_marquardt(fn, {0.0, 0.0}, {-10.0, -10.0}, {10.0, 10.0});
  CHECK(res.converged);
  CHECK(res.theta[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(res.theta[1] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(res.cost < 1e-12);
}

TEST_CASE("LM handles a nonlinear exponential fit") {
  const std::vector<double> ts{0.0, 0.5, 1.0, 2.0, 4.0};
  ResidualFn fn = [&](const std::vector<double>& th) {
    std::vector<double> r;
    for (double t : ts) r.push_back(th[0] * std::exp(-th[1] * t) - 3.0 * std::exp(-0.7 * t));
    return r;
  };
  const LMResult res = levenberg_marquardt(fn, {1.0, 0.1}, {0.0, 0.0}, {10.0, 10.0});
  CHECK(res.converged);
  CHECK(res.theta[0] == doctest::Approx(3.0).epsilon(1e-4));
  CHECK(res.theta[1] == doctest::Approx(0.7).epsilon(1e-4));
}

TEST_CASE("LM respects box bounds") {
  // unconstrained minimum at theta = 5, upper bound at 2
  ResidualFn fn = [](const std::vector<double>& th) {
    return std::vector<double>{th[0] - 5.0};
  };
  const LMResult res = levenberg_marquardt(fn, {1.0}, {0.0}, {2.0});
  CHECK(res.theta[0] <= 2.0 + 1e-12);
  CHECK(res.theta[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("LM reports non-convergence at the iteration cap") {
  LMConfig cfg;
  cfg.max_iters = 2;
  cfg.grad_tol = 1e-300;
  cfg.step_tol = 1e-300;
  ResidualFn fn = [](const std::vector<double>& th) {
    return std::vector<double>{std::exp(th[0]) - 100.0};
  };
  const LMResult res = levenberg_marquardt(fn, {0.0}, {-50.0}, {50.0}, cfg);
  CHECK(!res.converged);
  CHECK(res.iterations == 2);
}

TEST_CASE("LM rejects non-finite residuals with a diagnostic") {
  ResidualFn fn = [](const std::vector<double>&) {
    return std::vector<double>{std::numeric_limits<double>::quiet_NaN()};
  };
  CHECK_THROWS_AS(levenberg_marquardt(fn, {1.0}, {0.0}, {2.0}), CalibrationError);
}

TEST_CASE("TTT observation loader") {
  std::istringstream good("temp_K,log10_time_s,frac_norm\n900,0.5,0.25\n700,1.2,0.9\n");
  const auto obs = load_ttt_observations(good);
  REQUIRE(obs.size() == 2);
  CHECK(obs[0].temp_k == 900.0);
  CHECK(obs[0].log10_time_s == 0.5);
  CHECK(obs[1].frac_norm == 0.9);
  std::istringstream bad_header("T,logt,f\n900,0.5,0.25\n");
  CHECK_THROWS_AS(load_ttt_observations(bad_header), ParseError);
  std::istringstream out_of_range("temp_K,log10_time_s,frac_norm\n200,0.5,0.25\n");
  CHECK_THROWS_AS(load_ttt_observations(out_of_range), CalibrationError);
}

TEST_CASE("heating and cooling observation loaders") {
  std::istringstream heat("series,time_s,temp_K,x_beta\ns1,0,300,0.1\ns1,10,1000,0.5\n");
  const auto h = load_heating_observations(heat);
  REQUIRE(h.size() == 2);
  CHECK(h[1].x_beta == 0.5);
  std::istringstream cool("series,time_s,temp_K\na,1,1200\nb,2,1100\n");
  const auto c = load_cooling_observations(cool);
  REQUIRE(c.size() == 2);
  CHECK(c[0].series == "a");
  CHECK(cooling_series_depth_mm("a") == 3.2);
  CHECK(cooling_series_depth_mm("b") == 9.5);
  CHECK(cooling_series_depth_mm("c") == 12.0);
  CHECK(cooling_series_depth_mm("d") == 15.2);
  CHECK_THROWS_AS(cooling_series_depth_mm("e"), CalibrationError);
}

TEST_CASE("cooling objective vanishes at the generating parameters") {
  SibParams sib;
  sib.x_mm = cooling_series_depth_mm("a");
  const TemperaturePath path = sib_path(sib, 20.0);
  std::vector<SeriesObservation> obs;
  for (double t : {2.0, 5.0, 10.0, 20.0})
    obs.push_back({"a", t, path.temperature(t), 0.0});
  ResidualFn fn = make_cooling_objective(obs, sib);
  const auto r = fn({sib.a_g, sib.b_g, sib.c_g});
  REQUIRE(r.size() == obs.size());
  for (double v : r) CHECK(std::fabs(v) < 1e-6);
  // a perturbed gradient leaves visible residuals
  const auto rp = fn({1.3 * sib.a_g, sib.b_g, sib.c_g});
  double maxr = 0.0;
  for (double v : rp) maxr = std::max(maxr, std::fabs(v));
  CHECK(maxr > 1.0);
}

TEST_CASE("ttt objective vanishes at the generating parameters") {
  const ModelParams base{};
  TttConfig ttt;
  ttt.asymptote_tol = 0.0;
  std::vector<TttObservation> obs;
  for (double temp : {800.0, 900.0}) {
    Trajectory traj = simulate_ttt_hold(base, temp, 30.0, ttt);
    const double x_eq = alpha_equilibrium(temp, base.eq, base.temps);
    for (double t : {3.0, 10.0, 30.0}) {
      const double f = detail::normalized_alpha_s_at(traj, t, x_eq);
      obs.push_back({temp, std::log10(t), f});
    }
  }
  ResidualFn fn = make_ttt_objective(obs, base, ttt);
  const auto& d = base.diff;
  const auto r = fn({d.c_alpha_s, d.k1, d.k2, d.k3});
  REQUIRE(r.size() == obs.size());
  for (double v : r) CHECK(std::fabs(v) < 1e-4);
}

TEST_CASE("heating objective vanishes at the generating parameters") {
  const ModelParams base{};
  StepConfig step;
  step.dt = 1e-2;
  // linear heating ramp through the dissolution range
  std::vector<SeriesObservation> obs;
  const TemperaturePath ramp = TemperaturePath::analytic(
      [](double t) { return 900.0 + 5.0 * t; }, 80.0);
  obs.push_back({"s1", 0.0, 900.0, 0.1});
  PhaseState state{0.9, 0.0, 0.1, 0.0};
  Stepper stepper(base, step);
  stepper.reset(state, ramp.temperature(0.0));
  double t = 0.0;
  for (int i = 1; i <= 8000; ++i) {
    state = stepper.advance(state, t, t + step.dt, ramp);
    t += step.dt;
    if (i % 1000 == 0) obs.push_back({"s1", t, ramp.temperature(t), state.x_beta});
  }
  ResidualFn fn = make_heating_objective(obs, base, step);
  const auto r = fn({base.diff.c_beta, base.diff.f});
  REQUIRE(r.size() == obs.size());
  for (double v : r) CHECK(std::fabs(v) < 1e-6);
}
