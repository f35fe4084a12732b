#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ti64/errors.hpp"
#include "ti64/kinetics.hpp"
#include "ti64/params.hpp"
#include "ti64/temperature_path.hpp"

namespace ti64 {

enum class Scheme { ForwardEuler, CrankNicolson };

struct StepConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::ForwardEuler;
  double cn_tolerance = 1e-10;
  int cn_max_iters = 50;
  int record_every = 1;
  // optional geometric step growth; 1.0 keeps dt fixed
  double dt_growth = 1.0;
  double dt_max = 10.0;

  void validate() const {
    if (!(dt > 0.0 && cn_tolerance > 0.0 && cn_max_iters > 0 && record_every > 0 &&
          dt_growth >= 1.0 && dt_max >= dt))
      throw std::invalid_argument("invalid step configuration");
  }
};

struct TrajectorySample {
  double t = 0.0;
  double temperature = 0.0;
  PhaseState state;
  TransformationRates rates;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;

  const TrajectorySample& back() const { return samples.back(); }
  bool empty() const { return samples.empty(); }
};

/// Explicit diffusional update with the previous step's rates, followed by
/// clipping to [0, x_max], ratio-preserving rescaling of the alpha fractions,
/// and recomputation of beta from the continuity constraint.
inline PhaseState diffusional_update(const PhaseState& s, const TransformationRates& r,
                                     double dt, double x_max = 0.9) {
  double as = s.x_alpha_s + dt * (r.beta_to_as + r.am_to_as - r.as_to_beta);
  double am = s.x_alpha_m - dt * r.am_to_as;
  as = std::clamp(as, 0.0, x_max);
  am = std::clamp(am, 0.0, x_max);
  const double total = as + am;
  if (total > x_max) {
    const double scale = x_max / total;
    as *= scale;
    am *= scale;
  }
  return {as, am, 1.0 - as - am, 0.0};
}

/// Instantaneous Martensite formation: raise x_alpha_m to its pseudo
/// equilibrium by transfer from beta, limited so beta stays nonnegative.
inline PhaseState project_martensite_formation(const PhaseState& s, double t,
                                               const ModelParams& p) {
  const double eq = martensite_pseudo_eq(t, s.x_alpha_s, p.eq, p.temps);
  if (s.x_alpha_m >= eq) return s;
  const double transfer = std::min(eq - s.x_alpha_m, s.x_beta);
  PhaseState out = s;
  out.x_alpha_m += transfer;
  out.x_beta -= transfer;
  return out;
}

/// Instantaneous Martensite dissolution: raise beta to its equilibrium by
/// transfer from Martensite, limited by the available Martensite.
inline PhaseState project_martensite_dissolution(const PhaseState& s, double t,
                                                 const ModelParams& p) {
  if (s.x_alpha_m <= 0.0) return s;
  const double beq = beta_equilibrium(t, p.eq, p.temps);
  if (s.x_beta >= beq) return s;
  const double transfer = std::min(beq - s.x_beta, s.x_alpha_m);
  PhaseState out = s;
  out.x_beta += transfer;
  out.x_alpha_m -= transfer;
  return out;
}

/// Seed value for x_alpha_s at the first explicit step of a cooling episode,
/// from the closed-form isothermal solution evaluated after one step.
inline double initialize_alpha_s(double t, double dt, const DiffusionParams& p,
                                 double x_alpha_eq) {
  if (!(dt > 0.0)) throw std::domain_error("dt must be positive");
  if (x_alpha_eq <= 0.0) return 0.0;
  const double ktilde = k_alpha_s(t, p) * x_alpha_eq;
  const double bracket = 1.0 + std::pow(p.c_alpha_s / (ktilde * dt), p.c_alpha_s);
  return x_alpha_eq / bracket;  // bracket may be inf; x/inf == 0
}

/// Seed value for the corrected beta fraction x_beta - 0.1 during the opening
/// phase of a heating episode, from the closed-form isothermal solution of the
/// dissolution law evaluated at elapsed episode time. The corrected variable
/// obeys the same law as formation, with equilibrium x_beta_eq - 0.1 and rate
/// k_beta; because it rides on the 0.1 offset, a one-step seed would vanish in
/// double precision, so the closed form carries the state until it becomes
/// representable and the explicit scheme can take over.
inline double initialize_beta(double t, double elapsed, const DiffusionParams& p,
                              double x_beta_eq) {
  if (!(elapsed > 0.0)) throw std::domain_error("elapsed time must be positive");
  const double u_eq = x_beta_eq - 0.1;
  if (u_eq <= 0.0) return 0.0;
  const double ktilde = k_beta(t, p) * u_eq;
  const double bracket = 1.0 + std::pow(p.c_beta / (ktilde * elapsed), p.c_beta);
  return u_eq / bracket;  // bracket may be inf; x/inf == 0
}

/// Advances one material point in time. Holds the model parameters and the
/// diffusional-rate cache of the previous step; instances are independent and
/// many integrations may run concurrently.
class Stepper {
 public:
  Stepper(const ModelParams& params, const StepConfig& cfg)
      : params_(params), cfg_(cfg) {
    params_.validate();
    cfg_.validate();
  }

  /// Primes the rate cache for a fresh integration starting at temperature t.
  void reset(const PhaseState& s, double t) {
    rates_ = s.x_liq > 0.0 ? TransformationRates{}
                           : transformation_rates(s, t, params_.diff, params_.eq,
                                                  params_.temps);
    step_index_ = 0;
    dissolve_clock_ = 0.0;
  }

  const TransformationRates& rates() const { return rates_; }

  /// One step from t0 to t1 along the path. Pipeline: melting/resolidification
  /// handling, explicit seeding, diffusional update, Martensite formation and
  /// dissolution projections, rate recomputation at t1.
  PhaseState advance(const PhaseState& s, double t0, double t1,
                     const TemperaturePath& path) {
    const double dt = t1 - t0;
    if (!(dt > 0.0)) throw std::domain_error("step must move forward in time");
    ++step_index_;
    const double temp1 = path.temperature(t1);

    if (temp1 > params_.temps.t_sol) {
      // Mushy or liquid regime: melting erases the solid-state history and
      // any solid remainder is beta.
      const double sol = solid_fraction(temp1, params_.temps);
      rates_ = TransformationRates{};
      return {0.0, 0.0, sol, 1.0 - sol};
    }

    PhaseState w = s;
    bool refresh_rates = false;
    if (w.x_liq > 0.0) {
      w = PhaseState::pure_beta();  // resolidification restarts in beta
      refresh_rates = true;
    }

    const double x_alpha_eq1 = alpha_equilibrium(temp1, params_.eq, params_.temps);
    if (x_alpha_eq1 > 0.0 && w.x_alpha_s <= 0.0 && w.x_beta > 0.0) {
      // start of a cooling episode: the explicit scheme cannot leave
      // x_alpha_s = 0 on its own
      const double seed =
          std::min(initialize_alpha_s(temp1, dt, params_.diff, x_alpha_eq1), w.x_beta);
      w.x_alpha_s += seed;
      w.x_beta -= seed;
      refresh_rates = true;
    }
    // Carry the corrected fraction analytically while it is so small that the
    // explicit increments drown in the rounding of the 0.1 offset (per-step
    // growth within a few ulp of the stored beta fraction).
    constexpr double kCorrectedFloor = 1e-8;
    const double x_beta_eq1 = beta_equilibrium(temp1, params_.eq, params_.temps);
    if (w.x_beta - 0.1 <= kCorrectedFloor && w.x_alpha_s > 0.0 &&
        w.x_alpha_s + w.x_alpha_m > x_alpha_eq1 && x_beta_eq1 > 0.1) {
      // opening phase of a heating episode: the corrected beta fraction
      // x_beta - 0.1 cannot leave zero on its own under the explicit scheme.
      // Seed at the pre-step clock; the diffusional update below supplies the
      // current step's growth.
      const double elapsed = std::max(dissolve_clock_, dt);
      dissolve_clock_ += dt;
      const double target =
          0.1 + initialize_beta(temp1, elapsed, params_.diff, x_beta_eq1);
      // pin to the analytic value in both directions: sub-ulp explicit
      // increments otherwise accumulate a systematic rounding drift
      const double transfer = std::min(target - w.x_beta, w.x_alpha_s);
      if (transfer != 0.0) {
        w.x_beta += transfer;
        w.x_alpha_s -= transfer;
        refresh_rates = true;
      }
    } else {
      dissolve_clock_ = 0.0;
    }
    if (refresh_rates)
      rates_ = transformation_rates(w, path.temperature(t0), params_.diff, params_.eq,
                                    params_.temps);

    PhaseState next = cfg_.scheme == Scheme::ForwardEuler
                          ? diffusional_update(w, rates_, dt, params_.eq.x_max)
                          : cn_diffusional_stage(w, t0, t1, path);
    next = project_martensite_formation(next, temp1, params_);
    next = project_martensite_dissolution(next, temp1, params_);
    rates_ = transformation_rates(next, temp1, params_.diff, params_.eq, params_.temps);
    return next;
  }

 private:
  /// Implicit midpoint stage for the two diffusional variables, solved by
  /// damped fixed-point iteration on the rates.
  PhaseState cn_diffusional_stage(const PhaseState& w, double t0, double t1,
                                  const TemperaturePath& path) {
    const double dt = t1 - t0;
    const double temp_mid = 0.5 * (path.temperature(t0) + path.temperature(t1));
    const double as0 = w.x_alpha_s;
    const double am0 = w.x_alpha_m;
    double as = as0, am = am0;
    bool converged = false;
    for (int it = 0; it < cfg_.cn_max_iters; ++it) {
      const double as_mid = 0.5 * (as0 + as);
      const double am_mid = 0.5 * (am0 + am);
      const PhaseState mid{as_mid, am_mid, 1.0 - as_mid - am_mid, 0.0};
      const TransformationRates r =
          transformation_rates(mid, temp_mid, params_.diff, params_.eq, params_.temps);
      const double as_f = as0 + dt * (r.beta_to_as + r.am_to_as - r.as_to_beta);
      const double am_f = am0 - dt * r.am_to_as;
      const double as_next = as + 0.5 * (as_f - as);
      const double am_next = am + 0.5 * (am_f - am);
      const double delta = std::max(std::fabs(as_next - as), std::fabs(am_next - am));
      as = as_next;
      am = am_next;
      if (delta < cfg_.cn_tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw IntegrationError("Crank-Nicolson stage failed to converge at step " +
                             std::to_string(step_index_) + " (t = " +
                             std::to_string(t1) + " s)");
    // same clipping/rescaling as the explicit branch
    return diffusional_update({as, am, 1.0 - as - am, 0.0}, TransformationRates{}, dt,
                              params_.eq.x_max);
  }

  ModelParams params_;
  StepConfig cfg_;
  TransformationRates rates_{};
  std::size_t step_index_ = 0;
  double dissolve_clock_ = 0.0;
};

/// Fixed-step (optionally geometrically growing) integration over [t_begin,
/// t_end]. Records every `record_every`-th step plus the initial and final
/// samples.
inline Trajectory integrate(const PhaseState& initial, const TemperaturePath& path,
                            double t_begin, double t_end, const StepConfig& cfg,
                            const ModelParams& params) {
  cfg.validate();
  Trajectory traj;
  Stepper stepper(params, cfg);
  stepper.reset(initial, path.temperature(t_begin));
  traj.samples.push_back(
      {t_begin, path.temperature(t_begin), initial, stepper.rates()});
  PhaseState state = initial;
  double t = t_begin;
  double dt = cfg.dt;
  std::size_t n = 0;
  const double eps = 1e-12 * std::max(1.0, std::fabs(t_end));
  while (t < t_end - eps) {
    const double h = std::min(dt, t_end - t);
    state = stepper.advance(state, t, t + h, path);
    t += h;
    ++n;
    if (n % static_cast<std::size_t>(cfg.record_every) == 0 || t >= t_end - eps)
      traj.samples.push_back({t, path.temperature(t), state, stepper.rates()});
    dt = std::min(dt * cfg.dt_growth, cfg.dt_max);
  }
  return traj;
}

}  // namespace ti64
