#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ti64/integrator.hpp"
#include "ti64/parallel.hpp"
#include "ti64/params.hpp"
#include "ti64/thermal_paths.hpp"

namespace ti64 {

/// One threshold crossing of a monitored value along a trajectory.
struct Crossing {
  double level = 0.0;
  double t = 0.0;
  double temperature = 0.0;
  int direction = 0;  ///< +1 upward, -1 downward
};

/// All threshold crossings of value_fn over the recorded samples, located by
/// linear interpolation between neighbours.
inline std::vector<Crossing> extract_crossings(
    const Trajectory& traj, const std::function<double(const TrajectorySample&)>& value_fn,
    const std::vector<double>& thresholds) {
  std::vector<Crossing> out;
  if (traj.samples.size() < 2) return out;
  for (double level : thresholds) {
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
      const auto& a = traj.samples[i - 1];
      const auto& b = traj.samples[i];
      const double va = value_fn(a);
      const double vb = value_fn(b);
      const bool up = va < level && vb >= level;
      const bool down = va > level && vb <= level;
      if (!up && !down) continue;
      const double w = (level - va) / (vb - va);
      out.push_back({level, a.t + w * (b.t - a.t),
                     a.temperature + w * (b.temperature - a.temperature), up ? 1 : -1});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// TTT diagrams
// ---------------------------------------------------------------------------

struct TttConfig {
  double t_min = 350.0;
  double t_max = 1300.0;
  double t_step = 10.0;
  double hold_horizon = 1e6;
  std::vector<double> thresholds{0.01, 0.05, 0.45, 0.55, 0.95, 0.99};
  double ramp_dt = 1e-3;
  double hold_dt0 = 1e-3;
  double hold_growth = 1.05;
  double hold_dt_max = 10.0;
  double asymptote_tol = 1e-4;
  Scheme scheme = Scheme::ForwardEuler;
  int threads = 1;

  std::vector<double> targets() const {
    std::vector<double> out;
    for (double t = t_min; t <= t_max + 1e-9; t += t_step) out.push_back(t);
    return out;
  }
};

/// Quench-and-hold trajectory for one target temperature. Sample times are
/// measured from the start of the isothermal hold so crossings read as
/// isothermal transformation times. The hold step grows geometrically; the run
/// ends early once the remaining transformable fraction cannot move any
/// monitored value by more than asymptote_tol.
inline Trajectory simulate_ttt_hold(const ModelParams& params, double target,
                                    double hold_time, const TttConfig& cfg) {
  TemperaturePath path = ttt_path(target, hold_time);
  const double ramp = ttt_ramp_duration(target);

  StepConfig sc;
  sc.scheme = cfg.scheme;
  sc.dt = cfg.ramp_dt;
  Stepper stepper(params, sc);
  PhaseState state = PhaseState::pure_beta();
  stepper.reset(state, path.temperature(0.0));

  double t = 0.0;
  while (t < ramp - 1e-12) {
    const double h = std::min(cfg.ramp_dt, ramp - t);
    state = stepper.advance(state, t, t + h, path);
    t += h;
  }

  const double x_alpha_eq = alpha_equilibrium(target, params.eq, params.temps);
  const double beta_eq = 1.0 - x_alpha_eq;
  Trajectory traj;
  traj.samples.push_back({0.0, target, state, stepper.rates()});
  double dt = cfg.hold_dt0;
  double hold_t = 0.0;
  while (hold_t < hold_time - 1e-9) {
    const double h = std::min(dt, hold_time - hold_t);
    state = stepper.advance(state, ramp + hold_t, ramp + hold_t + h, path);
    hold_t += h;
    traj.samples.push_back({hold_t, target, state, stepper.rates()});
    const double transformable = (state.x_beta - beta_eq) + state.x_alpha_m;
    if (transformable < cfg.asymptote_tol * std::max(x_alpha_eq, 1e-12)) break;
    dt = std::min(dt * cfg.hold_growth, cfg.hold_dt_max);
  }
  return traj;
}

struct TttRow {
  double target = 0.0;
  double x_alpha_eq = 0.0;
  std::vector<Crossing> alpha_s;  ///< crossings of x_alpha_s / X_alpha^eq
  std::vector<Crossing> alpha_m;  ///< crossings of x_alpha_m / X_alpha^eq
  PhaseState final_state;

  /// First upward crossing time of `level`, or +inf when never reached.
  double first_crossing(const std::vector<Crossing>& cs, double level) const {
    for (const auto& c : cs)
      if (c.direction > 0 && std::fabs(c.level - level) < 1e-12) return c.t;
    return std::numeric_limits<double>::infinity();
  }
};

struct TttResult {
  TttConfig config;
  std::vector<TttRow> rows;
};

/// Sweeps the target-temperature grid; rows run independently in parallel and
/// the result ordering is fixed by the grid.
inline TttResult generate_ttt(const ModelParams& params, const TttConfig& cfg) {
  TttResult result;
  result.config = cfg;
  const std::vector<double> targets = cfg.targets();
  result.rows.resize(targets.size());
  parallel_for(static_cast<int>(targets.size()), cfg.threads, [&](int i) {
    const double target = targets[static_cast<std::size_t>(i)];
    TttRow row;
    row.target = target;
    row.x_alpha_eq = alpha_equilibrium(target, params.eq, params.temps);
    Trajectory traj = simulate_ttt_hold(params, target, cfg.hold_horizon, cfg);
    if (row.x_alpha_eq > 0.0) {
      const double inv = 1.0 / row.x_alpha_eq;
      row.alpha_s = extract_crossings(
          traj, [inv](const TrajectorySample& s) { return s.state.x_alpha_s * inv; },
          cfg.thresholds);
      row.alpha_m = extract_crossings(
          traj, [inv](const TrajectorySample& s) { return s.state.x_alpha_m * inv; },
          cfg.thresholds);
    }
    row.final_state = traj.back().state;
    result.rows[static_cast<std::size_t>(i)] = std::move(row);
  });
  return result;
}

// ---------------------------------------------------------------------------
// CCT diagrams
// ---------------------------------------------------------------------------

struct CctConfig {
  int n_curves = 150;
  double rate_slow = -1.0;    ///< K/s at 1173.15 K
  double rate_fast = -600.0;  ///< K/s at 1173.15 K
  std::vector<double> thresholds{0.01, 0.05, 0.45, 0.55, 0.95, 0.99};
  SibParams sib;  ///< s_g is solved per curve; x_mm fixes the evaluation depth
  double sg_lo = 1e-3;
  double sg_hi = 500.0;
  double rate_tol_rel = 0.002;
  double path_t_max = 2e5;
  Scheme scheme = Scheme::ForwardEuler;
  int threads = 1;
  int record_every = 8;

  std::vector<double> rate_targets() const {
    std::vector<double> out;
    for (int i = 0; i < n_curves; ++i) {
      const double w = n_curves == 1 ? 0.0 : static_cast<double>(i) / (n_curves - 1);
      out.push_back(rate_slow + w * (rate_fast - rate_slow));
    }
    return out;
  }
};

/// Finds the s_g scaling whose cooling curve has the requested representative
/// rate at 1173.15 K. The s_g -> rate map is monotone, so plain bisection.
inline double solve_s_g(double rate_target, const CctConfig& cfg) {
  auto rate_at = [&](double sg) {
    SibParams p = cfg.sib;
    p.s_g = sg;
    std::vector<double> times, temps;
    detail::march_sib(p, cfg.path_t_max, 1050.0, [&](double t, double temp) {
      times.push_back(t);
      temps.push_back(temp);
    });
    try {
      return cct_rate_of(TemperaturePath::sampled(std::move(times), std::move(temps)));
    } catch (const std::runtime_error&) {
      return 0.0;  // never reached 1173.15 K: treat as infinitely slow
    }
  };
  double lo = cfg.sg_lo, hi = cfg.sg_hi;
  if (rate_at(hi) > rate_target)
    throw std::runtime_error("requested cooling rate below reach of s_g range");
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double r = rate_at(mid);
    if (std::fabs(r - rate_target) <= cfg.rate_tol_rel * std::fabs(rate_target))
      return mid;
    (r > rate_target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct CctCurve {
  double rate_target = 0.0;
  double rate_actual = 0.0;
  double s_g = 0.0;
  PhaseState terminal;
  std::vector<Crossing> alpha_s;  ///< absolute-fraction crossings on t x T
  std::vector<Crossing> alpha_m;
  std::vector<Crossing> beta;
};

/// Integrates the microstructure from pure beta along one continuous cooling
/// curve. The step cap follows the local regime: fine while hot (and bounded
/// by 2 K of temperature change per step), coarse once diffusion is frozen.
inline CctCurve simulate_cct_curve(const ModelParams& params, double rate_target,
                                   const CctConfig& cfg) {
  CctCurve curve;
  curve.rate_target = rate_target;
  curve.s_g = solve_s_g(rate_target, cfg);
  SibParams p = cfg.sib;
  p.s_g = curve.s_g;
  const TemperaturePath path = cct_path(p, 350.0, cfg.path_t_max);
  curve.rate_actual = cct_rate_of(path);

  StepConfig sc;
  sc.scheme = cfg.scheme;
  Stepper stepper(params, sc);
  PhaseState state = PhaseState::pure_beta();
  stepper.reset(state, path.temperature(0.0));

  Trajectory traj;
  traj.samples.push_back({0.0, path.temperature(0.0), state, stepper.rates()});
  const double t_end = path.end_time();
  double t = 0.0;
  double dt = 1e-3;
  std::size_t n = 0;
  while (t < t_end - 1e-12) {
    const double h = std::min(dt, t_end - t);
    state = stepper.advance(state, t, t + h, path);
    t += h;
    ++n;
    if (n % static_cast<std::size_t>(cfg.record_every) == 0 || t >= t_end - 1e-12)
      traj.samples.push_back({t, path.temperature(t), state, stepper.rates()});
    const double temp = path.temperature(t);
    double cap;
    if (temp > 700.0)
      cap = std::min(0.02, 2.0 / std::max(std::fabs(path.rate(t)), 1e-9));
    else if (temp > 600.0)
      cap = 0.2;
    else
      cap = 10.0;
    dt = std::min(dt * 1.05, cap);
  }
  curve.terminal = state;
  curve.alpha_s = extract_crossings(
      traj, [](const TrajectorySample& s) { return s.state.x_alpha_s; }, cfg.thresholds);
  curve.alpha_m = extract_crossings(
      traj, [](const TrajectorySample& s) { return s.state.x_alpha_m; }, cfg.thresholds);
  curve.beta = extract_crossings(
      traj, [](const TrajectorySample& s) { return s.state.x_beta; }, cfg.thresholds);
  return curve;
}

struct CctResult {
  CctConfig config;
  std::vector<CctCurve> curves;  ///< ordered slow -> fast
};

inline CctResult generate_cct(const ModelParams& params, const CctConfig& cfg) {
  CctResult result;
  result.config = cfg;
  const std::vector<double> rates = cfg.rate_targets();
  result.curves.resize(rates.size());
  parallel_for(static_cast<int>(rates.size()), cfg.threads, [&](int i) {
    result.curves[static_cast<std::size_t>(i)] =
        simulate_cct_curve(params, rates[static_cast<std::size_t>(i)], cfg);
  });
  return result;
}

struct CriticalRates {
  double rate_pure_martensite = 0.0;  ///< slowest rate with terminal x_alpha_s < 1%
  double rate_pure_diffusional = 0.0; ///< fastest rate with terminal x_alpha_m < 1%
};

/// Locates the two critical cooling rates from the sweep's terminal fractions
/// and refines each between its grid neighbours by bisection on the rate.
inline CriticalRates critical_rates(const CctResult& sweep, const ModelParams& params,
                                    const CctConfig& cfg, int refine_iters = 8) {
  constexpr double kLevel = 0.01;
  const auto& curves = sweep.curves;
  if (curves.empty()) throw std::invalid_argument("empty CCT sweep");

  auto refine = [&](double rate_keep, double rate_other,
                    const std::function<bool(const PhaseState&)>& pred) {
    // pred holds at rate_keep, fails at rate_other
    for (int i = 0; i < refine_iters; ++i) {
      const double mid = 0.5 * (rate_keep + rate_other);
      const CctCurve c = simulate_cct_curve(params, mid, cfg);
      (pred(c.terminal) ? rate_keep : rate_other) = mid;
    }
    return rate_keep;
  };

  CriticalRates out;
  auto martensitic = [](const PhaseState& s) { return s.x_alpha_s < kLevel; };
  auto diffusional = [](const PhaseState& s) { return s.x_alpha_m < kLevel; };

  // slowest (least negative) martensitic curve; curves are ordered slow->fast
  std::size_t im = curves.size();
  for (std::size_t i = 0; i < curves.size(); ++i)
    if (martensitic(curves[i].terminal)) {
      im = i;
      break;
    }
  if (im == curves.size())
    out.rate_pure_martensite = curves.back().rate_target;  // never fully martensitic
  else if (im == 0)
    out.rate_pure_martensite = curves.front().rate_target;
  else
    out.rate_pure_martensite =
        refine(curves[im].rate_target, curves[im - 1].rate_target, martensitic);

  // fastest (most negative) fully diffusional curve
  std::size_t id = curves.size();
  for (std::size_t i = curves.size(); i-- > 0;)
    if (diffusional(curves[i].terminal)) {
      id = i;
      break;
    }
  if (id == curves.size())
    out.rate_pure_diffusional = curves.front().rate_target;  // Martensite everywhere
  else if (id + 1 == curves.size())
    out.rate_pure_diffusional = curves.back().rate_target;
  else
    out.rate_pure_diffusional =
        refine(curves[id].rate_target, curves[id + 1].rate_target, diffusional);
  return out;
}

}  // namespace ti64
