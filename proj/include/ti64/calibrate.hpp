#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "ti64/csv.hpp"
#include "ti64/diagrams.hpp"
#include "ti64/errors.hpp"
#include "ti64/integrator.hpp"
#include "ti64/levenberg_marquardt.hpp"
#include "ti64/params.hpp"
#include "ti64/thermal_paths.hpp"

namespace ti64 {

// ---------------------------------------------------------------------------
// Observation sets
// ---------------------------------------------------------------------------

struct TttObservation {
  double temp_k = 0.0;
  double log10_time_s = 0.0;
  double frac_norm = 0.0;
};

struct SeriesObservation {
  std::string series;
  double time_s = 0.0;
  double temp_k = 0.0;
  double x_beta = 0.0;  ///< unused for cooling observations
};

inline std::vector<TttObservation> load_ttt_observations(std::istream& in) {
  std::vector<TttObservation> out;
  for (const auto& [lineno, cells] : csv::read_rows(in, "temp_K,log10_time_s,frac_norm")) {
    if (cells.size() != 3)
      throw ParseError("expected 3 columns", lineno);
    TttObservation o;
    o.temp_k = csv::to_double(cells[0], lineno);
    o.log10_time_s = csv::to_double(cells[1], lineno);
    o.frac_norm = csv::to_double(cells[2], lineno);
    if (o.temp_k < 350.0 || o.temp_k > 1300.0)
      throw CalibrationError("observation temperature " + cells[0] +
                             " K outside the [350, 1300] K grid");
    out.push_back(o);
  }
  return out;
}

inline std::vector<SeriesObservation> load_heating_observations(std::istream& in) {
  std::vector<SeriesObservation> out;
  for (const auto& [lineno, cells] : csv::read_rows(in, "series,time_s,temp_K,x_beta")) {
    if (cells.size() != 4)
      throw ParseError("expected 4 columns", lineno);
    out.push_back({cells[0], csv::to_double(cells[1], lineno),
                   csv::to_double(cells[2], lineno), csv::to_double(cells[3], lineno)});
  }
  return out;
}

/// Cooling series labels map to the thermocouple depths of the quench setup.
inline double cooling_series_depth_mm(const std::string& series) {
  if (series == "a") return 3.2;
  if (series == "b") return 9.5;
  if (series == "c") return 12.0;
  if (series == "d") return 15.2;
  throw CalibrationError("unknown cooling series '" + series + "' (expected a-d)");
}

inline std::vector<SeriesObservation> load_cooling_observations(std::istream& in) {
  std::vector<SeriesObservation> out;
  for (const auto& [lineno, cells] : csv::read_rows(in, "series,time_s,temp_K")) {
    if (cells.size() != 3)
      throw ParseError("expected 3 columns", lineno);
    cooling_series_depth_mm(cells[0]);
    out.push_back({cells[0], csv::to_double(cells[1], lineno),
                   csv::to_double(cells[2], lineno), 0.0});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

namespace detail {

/// Piecewise-linear read of normalized alpha_s over a hold trajectory; times
/// beyond the recorded range clamp to the last sample (the trajectory only
/// ends early once the fraction has stopped moving).
inline double normalized_alpha_s_at(const Trajectory& traj, double t, double x_alpha_eq) {
  const auto& s = traj.samples;
  if (s.empty() || x_alpha_eq <= 0.0) return 0.0;
  if (t <= s.front().t) return s.front().state.x_alpha_s / x_alpha_eq;
  if (t >= s.back().t) return s.back().state.x_alpha_s / x_alpha_eq;
  auto it = std::lower_bound(s.begin(), s.end(), t,
                             [](const TrajectorySample& a, double v) { return a.t < v; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double w = (t - a.t) / (b.t - a.t);
  const double va = a.state.x_alpha_s / x_alpha_eq;
  const double vb = b.state.x_alpha_s / x_alpha_eq;
  return va + w * (vb - va);
}

inline std::map<std::string, std::vector<const SeriesObservation*>> group_by_series(
    const std::vector<SeriesObservation>& obs) {
  std::map<std::string, std::vector<const SeriesObservation*>> groups;
  for (const auto& o : obs) groups[o.series].push_back(&o);
  for (auto& [name, rows] : groups)
    std::sort(rows.begin(), rows.end(),
              [](const SeriesObservation* a, const SeriesObservation* b) {
                return a->time_s < b->time_s;
              });
  return groups;
}

}  // namespace detail

/// theta = [c_alpha_s, k1, k2, k3]. One quench-and-hold integration per
/// distinct observation temperature; residuals are normalized-fraction
/// mismatches at the observed log-times.
inline ResidualFn make_ttt_objective(std::vector<TttObservation> obs,
                                     ModelParams base, TttConfig ttt_cfg) {
  if (obs.empty()) throw CalibrationError("empty TTT observation set");
  std::map<double, std::vector<std::size_t>> by_temp;
  for (std::size_t i = 0; i < obs.size(); ++i) by_temp[obs[i].temp_k].push_back(i);

  return [obs = std::move(obs), by_temp = std::move(by_temp), base,
          ttt_cfg](const std::vector<double>& theta) {
    if (theta.size() != 4) throw CalibrationError("TTT objective expects 4 parameters");
    ModelParams params = base;
    params.diff.c_alpha_s = theta[0];
    params.diff.k1 = theta[1];
    params.diff.k2 = theta[2];
    params.diff.k3 = theta[3];

    std::vector<double> residuals(obs.size(), 0.0);
    std::vector<std::pair<double, const std::vector<std::size_t>*>> groups;
    groups.reserve(by_temp.size());
    for (const auto& [temp, idx] : by_temp) groups.emplace_back(temp, &idx);
    parallel_for(static_cast<int>(groups.size()), ttt_cfg.threads, [&](int gi) {
      const auto& [temp, idx] = groups[static_cast<std::size_t>(gi)];
      double t_max = 0.0;
      for (std::size_t i : *idx)
        t_max = std::max(t_max, std::pow(10.0, obs[i].log10_time_s));
      TttConfig cfg = ttt_cfg;
      cfg.asymptote_tol = 0.0;  // interpolation needs the full time range
      Trajectory traj = simulate_ttt_hold(params, temp, t_max, cfg);
      const double x_eq = alpha_equilibrium(temp, params.eq, params.temps);
      for (std::size_t i : *idx)
        residuals[i] = detail::normalized_alpha_s_at(
                           traj, std::pow(10.0, obs[i].log10_time_s), x_eq) -
                       obs[i].frac_norm;
    });
    return residuals;
  };
}

/// theta = [c_beta, f]. Integrates from the equilibrium alpha+beta state along
/// each sampled heating series; residuals are trapezoid-weighted X_beta
/// mismatches so the squared sum approximates the per-series time integrals.
inline ResidualFn make_heating_objective(std::vector<SeriesObservation> obs,
                                         ModelParams base, StepConfig step) {
  if (obs.empty()) throw CalibrationError("empty heating observation set");
  return [obs = std::move(obs), base, step](const std::vector<double>& theta) {
    if (theta.size() != 2)
      throw CalibrationError("heating objective expects 2 parameters");
    ModelParams params = base;
    params.diff.c_beta = theta[0];
    params.diff.f = theta[1];

    std::vector<double> residuals;
    for (const auto& [name, rows] : detail::group_by_series(obs)) {
      std::vector<double> times, temps;
      for (const auto* r : rows) {
        times.push_back(r->time_s);
        temps.push_back(r->temp_k);
      }
      const TemperaturePath path = TemperaturePath::sampled(times, temps);

      PhaseState state;
      state.x_alpha_s = 0.9;
      state.x_alpha_m = 0.0;
      state.x_beta = 0.1;
      Stepper stepper(params, step);
      stepper.reset(state, path.temperature(times.front()));

      const std::size_t n = rows.size();
      for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
          double t = times[i - 1];
          while (t < times[i] - 1e-12) {
            const double h = std::min(step.dt, times[i] - t);
            state = stepper.advance(state, t, t + h, path);
            t += h;
          }
        }
        double w;
        if (n == 1)
          w = 1.0;
        else if (i == 0)
          w = 0.5 * (times[1] - times[0]);
        else if (i + 1 == n)
          w = 0.5 * (times[n - 1] - times[n - 2]);
        else
          w = 0.5 * (times[i + 1] - times[i - 1]);
        residuals.push_back(std::sqrt(w) * (state.x_beta - rows[i]->x_beta));
      }
    }
    return residuals;
  };
}

/// theta = [a_g, b_g, c_g]. Residuals T_obs - T_model at the observation
/// times, concatenated over the a-d depth series, with s_g fixed at 1.
inline ResidualFn make_cooling_objective(std::vector<SeriesObservation> obs,
                                         SibParams base) {
  if (obs.empty()) throw CalibrationError("empty cooling observation set");
  return [obs = std::move(obs), base](const std::vector<double>& theta) {
    if (theta.size() != 3)
      throw CalibrationError("cooling objective expects 3 parameters");
    std::vector<double> residuals;
    for (const auto& [name, rows] : detail::group_by_series(obs)) {
      SibParams p = base;
      p.s_g = 1.0;
      p.a_g = theta[0];
      p.b_g = theta[1];
      p.c_g = theta[2];
      p.x_mm = cooling_series_depth_mm(name);
      try {
        const TemperaturePath path = sib_path(p, rows.back()->time_s);
        for (const auto* r : rows)
          residuals.push_back(r->temp_k - path.temperature(r->time_s));
      } catch (const IntegrationError&) {
        // divergent trial gradient: finite penalty so the step gets rejected
        for (std::size_t i = 0; i < rows.size(); ++i) residuals.push_back(1e6);
      }
    }
    return residuals;
  };
}

// ---------------------------------------------------------------------------
// Default parameter boxes (keep exponents and logistic arguments well-posed)
// ---------------------------------------------------------------------------

inline std::vector<double> ttt_lower_bounds() { return {1.0 + 1e-6, 1e-9, 300.0, 1e-9}; }
inline std::vector<double> ttt_upper_bounds() { return {50.0, 10.0, 2000.0, 1.0}; }
inline std::vector<double> heating_lower_bounds() { return {1.0 + 1e-6, 1e-9}; }
inline std::vector<double> heating_upper_bounds() { return {50.0, 100.0}; }
inline std::vector<double> cooling_lower_bounds() { return {-1e4, -1e4, -1e4}; }
inline std::vector<double> cooling_upper_bounds() { return {1e4, 1e4, 1e4}; }

}  // namespace ti64
