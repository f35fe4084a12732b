#pragma once

#include <istream>
#include <string>

#include "ti64/diagrams.hpp"
#include "ti64/errors.hpp"
#include "ti64/integrator.hpp"
#include "ti64/levenberg_marquardt.hpp"
#include "ti64/params.hpp"
#include "ti64/thermal_paths.hpp"

namespace ti64 {

/// Everything a run needs; every field can be overridden from a flat
/// `section.key = value` config file.
struct RunConfig {
  ModelParams params;
  StepConfig step;
  SibParams sib;
  TttConfig ttt;
  CctConfig cct;
  LMConfig lm;

  void validate() const {
    params.validate();
    step.validate();
    sib.validate();
    lm.validate();
    if (ttt.t_min >= ttt.t_max || ttt.t_step <= 0 || ttt.hold_horizon <= 0)
      throw ConfigError("invalid ttt grid");
    if (cct.n_curves < 1 || cct.rate_slow >= 0 || cct.rate_fast >= cct.rate_slow)
      throw ConfigError("invalid cct rate grid");
  }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  const auto b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: '" + value + "'");
  }
}

inline int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not an integer: '" + value + "'");
  }
}

inline Scheme parse_scheme(const std::string& key, const std::string& value) {
  if (value == "euler") return Scheme::ForwardEuler;
  if (value == "cn") return Scheme::CrankNicolson;
  throw ConfigError("key '" + key + "': expected euler|cn, got '" + value + "'");
}

}  // namespace detail

/// Applies one dotted key. Unknown keys are errors so that typos never pass
/// silently.
inline void apply_config_key(RunConfig& cfg, const std::string& key,
                             const std::string& value) {
  auto num = [&] { return detail::parse_double(key, value); };
  auto integer = [&] { return detail::parse_int(key, value); };

  auto& t = cfg.params.temps;
  auto& e = cfg.params.eq;
  auto& d = cfg.params.diff;

  if (key == "temps.t_am_end") t.t_am_end = num();
  else if (key == "temps.t_am_sta") t.t_am_sta = num();
  else if (key == "temps.t_as_end") t.t_as_end = num();
  else if (key == "temps.t_as_sta") t.t_as_sta = num();
  else if (key == "temps.t_sol") t.t_sol = num();
  else if (key == "temps.t_liq") t.t_liq = num();
  else if (key == "temps.t_room") t.t_room = num();
  else if (key == "eq.k_alpha_eq") e.k_alpha_eq = num();
  else if (key == "eq.k_alpham_eq") e.k_alpham_eq = num();
  else if (key == "eq.x_max") e.x_max = num();
  else if (key == "kinetics.c_alpha_s") d.c_alpha_s = num();
  else if (key == "kinetics.k1") d.k1 = num();
  else if (key == "kinetics.k2") d.k2 = num();
  else if (key == "kinetics.k3") d.k3 = num();
  else if (key == "kinetics.c_beta") d.c_beta = num();
  else if (key == "kinetics.f") d.f = num();
  else if (key == "step.dt") cfg.step.dt = num();
  else if (key == "step.scheme") cfg.step.scheme = detail::parse_scheme(key, value);
  else if (key == "step.cn_tolerance") cfg.step.cn_tolerance = num();
  else if (key == "step.cn_max_iters") cfg.step.cn_max_iters = integer();
  else if (key == "step.record_every") cfg.step.record_every = integer();
  else if (key == "step.dt_growth") cfg.step.dt_growth = num();
  else if (key == "step.dt_max") cfg.step.dt_max = num();
  else if (key == "sib.t0") cfg.sib.t0 = num();
  else if (key == "sib.t_inf") cfg.sib.t_inf = num();
  else if (key == "sib.diffusivity") cfg.sib.diffusivity = num();
  else if (key == "sib.a_g") cfg.sib.a_g = num();
  else if (key == "sib.b_g") cfg.sib.b_g = num();
  else if (key == "sib.c_g") cfg.sib.c_g = num();
  else if (key == "sib.s_g") cfg.sib.s_g = num();
  else if (key == "sib.x_mm") cfg.sib.x_mm = num();
  else if (key == "ttt.t_min") cfg.ttt.t_min = num();
  else if (key == "ttt.t_max") cfg.ttt.t_max = num();
  else if (key == "ttt.t_step") cfg.ttt.t_step = num();
  else if (key == "ttt.hold_horizon") cfg.ttt.hold_horizon = num();
  else if (key == "ttt.ramp_dt") cfg.ttt.ramp_dt = num();
  else if (key == "ttt.hold_dt0") cfg.ttt.hold_dt0 = num();
  else if (key == "ttt.hold_growth") cfg.ttt.hold_growth = num();
  else if (key == "ttt.hold_dt_max") cfg.ttt.hold_dt_max = num();
  else if (key == "ttt.asymptote_tol") cfg.ttt.asymptote_tol = num();
  else if (key == "cct.n_curves") cfg.cct.n_curves = integer();
  else if (key == "cct.rate_slow") cfg.cct.rate_slow = num();
  else if (key == "cct.rate_fast") cfg.cct.rate_fast = num();
  else if (key == "cct.sg_lo") cfg.cct.sg_lo = num();
  else if (key == "cct.sg_hi") cfg.cct.sg_hi = num();
  else if (key == "cct.rate_tol_rel") cfg.cct.rate_tol_rel = num();
  else if (key == "cct.path_t_max") cfg.cct.path_t_max = num();
  else if (key == "cct.record_every") cfg.cct.record_every = integer();
  else if (key == "lm.initial_damping") cfg.lm.initial_damping = num();
  else if (key == "lm.damping_up") cfg.lm.damping_up = num();
  else if (key == "lm.damping_down") cfg.lm.damping_down = num();
  else if (key == "lm.max_iters") cfg.lm.max_iters = integer();
  else if (key == "lm.grad_tol") cfg.lm.grad_tol = num();
  else if (key == "lm.step_tol") cfg.lm.step_tol = num();
  else if (key == "lm.fd_rel_step") cfg.lm.fd_rel_step = num();
  else throw ConfigError("unknown config key '" + key + "'");
}

/// Flat `section.key = value` text, '#' comments, blank lines ignored.
inline void load_config(std::istream& in, RunConfig& cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    apply_config_key(cfg, key, value);
  }
}

}  // namespace ti64
