#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <vector>

#include "ti64/csv.hpp"
#include "ti64/errors.hpp"
#include "ti64/temperature_path.hpp"

namespace ti64 {

namespace detail {

/// Scaled complementary error function exp(z^2) erfc(z), z >= 0.
inline double erfcx(double z) {
  if (z < 6.0) return std::exp(z * z) * std::erfc(z);
  // asymptotic series 1/(z sqrt(pi)) * sum (-1)^n (2n-1)!!/(2 z^2)^n
  const double inv2z2 = 1.0 / (2.0 * z * z);
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < 60; ++n) {
    term *= -(2.0 * n - 1.0) * inv2z2;
    sum += term;
    if (std::fabs(term) < 1e-17) break;
  }
  return sum / (z * std::sqrt(M_PI));
}

}  // namespace detail

/// Semi-infinite-body cooling curve parameters. g coefficients are per meter,
/// lengths in mm, diffusivity in mm^2/s.
struct SibParams {
  double t0 = 1323.0;
  double t_inf = 293.15;
  double diffusivity = 10.0;
  double a_g = 73.8;
  double b_g = -39.3;
  double c_g = 6.3;
  double s_g = 1.0;
  double x_mm = 3.2;

  void validate() const {
    if (!(diffusivity > 0.0 && x_mm >= 0.0 && t0 > t_inf))
      throw std::invalid_argument("sib parameters out of range");
  }
};

/// Quadratic convection ratio g(T) [1/m].
inline double g_of_T(double t, const SibParams& p) {
  const double theta = (t - p.t_inf) / p.t_inf;
  return p.s_g * (p.a_g + p.b_g * theta + p.c_g * theta * theta);
}

/// Constant-g analytic half-space solution, evaluated in a cancellation-safe
/// scaled form: exp(gx + g^2 a t) erfc(z2) == exp(-x^2/(4 a t)) erfcx(z2).
inline double sib_temperature_const_g(double t, double g_per_m, const SibParams& p) {
  if (t < 0.0) throw std::domain_error("time must be nonnegative");
  if (t == 0.0) return p.t0;
  const double alpha = p.diffusivity * 1e-6;  // m^2/s
  const double x = p.x_mm * 1e-3;             // m
  const double sq = std::sqrt(alpha * t);
  const double z1 = x / (2.0 * sq);
  const double z2 = z1 + g_per_m * sq;
  const double term1 = std::erfc(z1);
  const double term2 = std::exp(-z1 * z1) * detail::erfcx(z2);
  return (p.t_inf - p.t0) * (term1 - term2) + p.t0;
}

namespace detail {

/// Marches the lagged-g evaluation of the cooling curve: at each grid time the
/// constant-g solution is evaluated with g frozen at the previous grid
/// temperature, seeded with g(T0). Grid steps start at 1e-3 s and grow only
/// while the temperature change per step stays small, which reproduces the
/// fixed fine-grid curve to ~1e-2 K at a fraction of the cost.
template <class Visit>
inline void march_sib(const SibParams& p, double t_max, double stop_temp, Visit&& visit) {
  double t = 0.0;
  double temp = p.t0;
  double g = g_of_T(p.t0, p);
  double dt = 1e-3;
  std::size_t steps = 0;
  visit(t, temp);
  while (t < t_max) {
    const double h = std::min(dt, t_max - t);
    t += h;
    const double next = sib_temperature_const_g(t, g, p);
    if (!std::isfinite(next) || ++steps > 10'000'000)
      throw IntegrationError("cooling solution diverged (gradient parameters "
                             "outside the physical regime)");
    const double rate = std::fabs(next - temp) / h;
    g = g_of_T(next, p);
    temp = next;
    visit(t, temp);
    if (temp <= stop_temp) break;
    dt = std::min({dt * 1.2, 0.5 / std::max(rate, 1e-10), 50.0});
  }
}

}  // namespace detail

/// Lagged-g cooling curve as a sampled path on [0, t_end].
inline TemperaturePath sib_path(const SibParams& p, double t_end) {
  p.validate();
  std::vector<double> ts, temps;
  detail::march_sib(p, t_end, -1.0, [&](double t, double temp) {
    ts.push_back(t);
    temps.push_back(temp);
  });
  return TemperaturePath::sampled(std::move(ts), std::move(temps));
}

/// Cooling-curve temperature at one instant (marches the lagged evaluation).
inline double sib_temperature(double t, const SibParams& p) {
  p.validate();
  if (t < 0.0) throw std::domain_error("time must be nonnegative");
  double out = p.t0;
  detail::march_sib(p, t, -1.0, [&](double tt, double temp) {
    (void)tt;
    out = temp;
  });
  return out;
}

/// CCT cooling curve: sib decay until `stop_temp` (or `t_max`), then a fast
/// linear ramp down to room temperature and a short hold. The analytic curve
/// approaches the fluid temperature only asymptotically; diffusion is frozen
/// below `stop_temp`, so the terminal ramp changes nothing but lets every
/// curve end exactly at room temperature.
inline TemperaturePath cct_path(const SibParams& p, double stop_temp = 350.0,
                                double t_max = 2e5, double ramp_rate = -500.0,
                                double hold = 0.5) {
  p.validate();
  std::vector<double> ts, temps;
  detail::march_sib(p, t_max, stop_temp, [&](double t, double temp) {
    ts.push_back(t);
    temps.push_back(temp);
  });
  const double t_last = ts.back();
  const double temp_last = temps.back();
  if (temp_last > p.t_inf) {
    const double ramp = (p.t_inf - temp_last) / ramp_rate;
    ts.push_back(t_last + ramp);
    temps.push_back(p.t_inf);
  }
  ts.push_back(ts.back() + hold);
  temps.push_back(p.t_inf);
  return TemperaturePath::sampled(std::move(ts), std::move(temps));
}

/// TTT protocol path: start at 1400 K, ramp at -500 K/s to the target, hold.
inline TemperaturePath ttt_path(double t_target, double hold_time = 1e6) {
  if (!(t_target >= 350.0 && t_target <= 1300.0))
    std::fprintf(stderr, "warning: TTT target %.6g K outside the usual [350, 1300] K range\n",
                 t_target);
  constexpr double kStart = 1400.0;
  constexpr double kRate = -500.0;
  const double ramp = std::max(0.0, (kStart - t_target) / -kRate);
  auto temp = [=](double t) { return t < ramp ? kStart + kRate * t : t_target; };
  auto rate = [=](double t) { return t < ramp ? kRate : 0.0; };
  return TemperaturePath::analytic(temp, rate, ramp + hold_time);
}

inline double ttt_ramp_duration(double t_target) {
  return std::max(0.0, (1400.0 - t_target) / 500.0);
}

/// Representative CCT cooling rate: dT/dt at the first downward crossing of
/// 1173.15 K, by central finite difference with dt = 1e-4 s.
inline double cct_rate_of(const TemperaturePath& path) {
  constexpr double kRef = 1173.15;
  double t_cross = -1.0;
  if (path.is_sampled()) {
    const auto& ts = path.sample_times();
    const auto& temps = path.sample_temps();
    for (std::size_t i = 1; i < ts.size(); ++i) {
      if (temps[i - 1] > kRef && temps[i] <= kRef) {
        const double w = (temps[i - 1] - kRef) / (temps[i - 1] - temps[i]);
        t_cross = ts[i - 1] + w * (ts[i] - ts[i - 1]);
        break;
      }
    }
  } else {
    double t = 0.0, dt = 1e-3;
    double prev = path.temperature(0.0);
    while (t < path.end_time()) {
      const double tn = std::min(path.end_time(), t + dt);
      const double cur = path.temperature(tn);
      if (prev > kRef && cur <= kRef) {
        double lo = t, hi = tn;
        for (int i = 0; i < 60 && hi - lo > 1e-9; ++i) {
          const double mid = 0.5 * (lo + hi);
          (path.temperature(mid) > kRef ? lo : hi) = mid;
        }
        t_cross = 0.5 * (lo + hi);
        break;
      }
      prev = cur;
      t = tn;
      dt = std::min(dt * 1.05, 1.0);
    }
  }
  if (t_cross < 0.0)
    throw std::runtime_error("path never crosses 1173.15 K while cooling");
  const double h = 1e-4;
  const double lo = std::max(0.0, t_cross - h);
  const double hi = std::min(path.end_time(), t_cross + h);
  return (path.temperature(hi) - path.temperature(lo)) / (hi - lo);
}

/// Temperature-history CSV loader, header `time_s,temp_K`.
inline TemperaturePath load_path_csv(std::istream& in) {
  std::vector<double> ts, temps;
  for (const auto& [lineno, cells] : csv::read_rows(in, "time_s,temp_K")) {
    if (cells.size() != 2) throw ParseError("expected 2 columns", lineno);
    const double t = csv::to_double(cells[0], lineno);
    const double temp = csv::to_double(cells[1], lineno);
    if (!ts.empty() && !(t > ts.back()))
      throw ParseError("time column must be strictly increasing", lineno);
    ts.push_back(t);
    temps.push_back(temp);
  }
  if (ts.empty()) throw ParseError("temperature history has no data rows");
  if (ts.size() == 1) {
    const double temp = temps[0];
    return TemperaturePath::analytic([temp](double) { return temp; },
                                     [](double) { return 0.0; }, ts[0]);
  }
  return TemperaturePath::sampled(std::move(ts), std::move(temps));
}

}  // namespace ti64
