#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ti64 {

/// Characteristic transformation temperatures of Ti-6Al-4V [K].
struct CharacteristicTemperatures {
  double t_am_end = 293.0;   ///< Martensite end
  double t_am_sta = 848.0;   ///< Martensite start
  double t_as_end = 935.0;   ///< alpha-transus end
  double t_as_sta = 1273.0;  ///< alpha-transus start
  double t_sol = 1878.0;     ///< solidus
  double t_liq = 1928.0;     ///< liquidus
  double t_room = 293.15;    ///< ambient / cooling-fluid temperature

  void validate() const {
    if (!(t_am_end < t_am_sta && t_am_sta < t_as_end && t_as_end < t_as_sta &&
          t_as_sta < t_sol && t_sol < t_liq))
      throw std::invalid_argument(
          "characteristic temperatures must be strictly increasing");
  }
};

struct EquilibriumParams {
  double k_alpha_eq = 0.0068;    ///< [1/K]
  double k_alpham_eq = 0.00415;  ///< [1/K]
  double x_max = 0.9;            ///< maximal alpha fraction

  void validate() const {
    if (!(k_alpha_eq > 0.0 && k_alpham_eq > 0.0 && x_max > 0.0 && x_max <= 1.0))
      throw std::invalid_argument("equilibrium parameters out of range");
  }
};

/// Volume-averaged phase fractions at one material point and instant.
/// x_alpha_s + x_alpha_m + x_beta + x_liq == 1 after every public operation.
struct PhaseState {
  double x_alpha_s = 0.0;
  double x_alpha_m = 0.0;
  double x_beta = 1.0;
  double x_liq = 0.0;

  double sum() const { return x_alpha_s + x_alpha_m + x_beta + x_liq; }

  static PhaseState pure_beta() { return {0.0, 0.0, 1.0, 0.0}; }
  static PhaseState pure_liquid() { return {0.0, 0.0, 0.0, 1.0}; }
};

namespace detail {
inline void require_finite_temperature(double t) {
  if (!std::isfinite(t)) throw std::domain_error("temperature must be finite");
}
}  // namespace detail

/// Solid fraction X_sol(T): 1 below solidus, 0 above liquidus, linear between.
inline double solid_fraction(double t, const CharacteristicTemperatures& temps) {
  detail::require_finite_temperature(t);
  if (t <= 0.0) throw std::domain_error("temperature must be positive");
  if (t <= temps.t_sol) return 1.0;
  if (t >= temps.t_liq) return 0.0;
  return 1.0 - (t - temps.t_sol) / (temps.t_liq - temps.t_sol);
}

/// Stable alpha equilibrium fraction X_alpha^eq(T), Koistinen-Marburger form.
/// The exponential branch is clamped at x_max so the low-temperature plateau
/// joins continuously (to plotting tolerance) at t_as_end.
inline double alpha_equilibrium(double t, const EquilibriumParams& p,
                                const CharacteristicTemperatures& temps) {
  detail::require_finite_temperature(t);
  if (t > temps.t_as_sta) return 0.0;
  if (t < temps.t_as_end) return p.x_max;
  return std::min(p.x_max, 1.0 - std::exp(-p.k_alpha_eq * (temps.t_as_sta - t)));
}

inline double beta_equilibrium(double t, const EquilibriumParams& p,
                               const CharacteristicTemperatures& temps) {
  return 1.0 - alpha_equilibrium(t, p, temps);
}

/// Martensite pseudo-equilibrium X_am,0^eq(T) in the absence of alpha_s.
/// Capped at x_max; the cap binds below t_room where the exponential slightly
/// exceeds 0.9.
inline double martensite_pseudo_eq_base(double t, const EquilibriumParams& p,
                                        const CharacteristicTemperatures& temps) {
  detail::require_finite_temperature(t);
  if (t > temps.t_am_sta) return 0.0;
  if (t < temps.t_room) return p.x_max;
  return std::min(p.x_max, 1.0 - std::exp(-p.k_alpham_eq * (temps.t_am_sta - t)));
}

/// Effective Martensite pseudo-equilibrium for a given alpha_s fraction.
/// Guarantees result + x_alpha_s < x_max.
inline double martensite_pseudo_eq(double t, double x_alpha_s,
                                   const EquilibriumParams& p,
                                   const CharacteristicTemperatures& temps) {
  if (!(x_alpha_s >= 0.0 && x_alpha_s <= p.x_max))
    throw std::domain_error("x_alpha_s outside [0, x_max]");
  return martensite_pseudo_eq_base(t, p, temps) * (p.x_max - x_alpha_s) / p.x_max;
}

}  // namespace ti64
