#pragma once

#include <cmath>
#include <stdexcept>

#include "ti64/phase_model.hpp"

namespace ti64 {

/// Kinetic parameters of the diffusional transformations.
struct DiffusionParams {
  double c_alpha_s = 2.51;  ///< logistic exponent, beta -> alpha_s
  double k1 = 0.294;        ///< rate saturation [1/s]
  double k2 = 850.0;        ///< logistic midpoint [K]
  double k3 = 0.0337;       ///< logistic steepness [1/K]
  double c_beta = 11.0;     ///< logistic exponent, alpha_s -> beta
  double f = 3.8;           ///< dissolution rate scale

  void validate() const {
    if (!(c_alpha_s > 1.0 && c_beta > 1.0 && k1 > 0.0 && k3 > 0.0 && f > 0.0))
      throw std::invalid_argument("diffusion parameters out of range");
  }
};

/// Diffusional transformation rates [1/s], all nonnegative.
struct TransformationRates {
  double beta_to_as = 0.0;
  double am_to_as = 0.0;
  double as_to_beta = 0.0;
};

/// Temperature-dependent diffusion rate, overflow-safe logistic.
inline double k_alpha_s(double t, const DiffusionParams& p) {
  detail::require_finite_temperature(t);
  const double a = p.k3 * (t - p.k2);
  if (a >= 0.0) return p.k1 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return p.k1 * e / (1.0 + e);
}

inline double k_beta(double t, const DiffusionParams& p) {
  return p.f * k_alpha_s(t, p);
}

namespace detail {
// (base)^e with the base clamped at zero; floating-point cancellation in the
// driving-force differences can produce values like -1e-17.
inline double pos_pow(double base, double e) {
  return base > 0.0 ? std::pow(base, e) : 0.0;
}
}  // namespace detail

/// Diffusional beta -> alpha_s formation rate. `x_beta_eq` is the beta
/// equilibrium fraction at the current temperature, evaluated by the caller.
inline double rate_beta_to_alpha_s(const PhaseState& s, double t,
                                   const DiffusionParams& p, double x_beta_eq) {
  const double drive = s.x_beta - x_beta_eq;
  if (drive <= 0.0) return 0.0;
  const double c = p.c_alpha_s;
  return k_alpha_s(t, p) * detail::pos_pow(s.x_alpha_s, (c - 1.0) / c) *
         detail::pos_pow(drive, (c + 1.0) / c);
}

/// Diffusional alpha_m -> alpha_s dissolution rate; the long-term Martensite
/// target is zero.
inline double rate_am_to_alpha_s(const PhaseState& s, double t,
                                 const DiffusionParams& p) {
  if (s.x_alpha_m <= 0.0) return 0.0;
  const double c = p.c_alpha_s;
  return k_alpha_s(t, p) * detail::pos_pow(s.x_alpha_s, (c - 1.0) / c) *
         detail::pos_pow(s.x_alpha_m, (c + 1.0) / c);
}

/// Diffusional alpha_s -> beta dissolution rate during heating. Uses the
/// corrected beta fraction (x_beta - 0.1), clamped at zero from below.
inline double rate_alpha_s_to_beta(const PhaseState& s, double t,
                                   const DiffusionParams& p, double x_alpha_eq) {
  const double x_alpha = s.x_alpha_s + s.x_alpha_m;
  const double drive = x_alpha - x_alpha_eq;
  if (drive <= 0.0) return 0.0;
  const double c = p.c_beta;
  return k_beta(t, p) * detail::pos_pow(s.x_beta - 0.1, (c - 1.0) / c) *
         detail::pos_pow(drive, (c + 1.0) / c);
}

/// All three diffusional rates at temperature `t`. Equilibria are evaluated
/// once here so a time step uses a single consistent set.
inline TransformationRates transformation_rates(const PhaseState& s, double t,
                                                const DiffusionParams& diff,
                                                const EquilibriumParams& eq,
                                                const CharacteristicTemperatures& temps) {
  const double x_alpha_eq = alpha_equilibrium(t, eq, temps);
  TransformationRates r;
  r.beta_to_as = rate_beta_to_alpha_s(s, t, diff, 1.0 - x_alpha_eq);
  r.am_to_as = rate_am_to_alpha_s(s, t, diff);
  r.as_to_beta = rate_alpha_s_to_beta(s, t, diff, x_alpha_eq);
  return r;
}

}  // namespace ti64
