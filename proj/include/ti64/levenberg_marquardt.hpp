#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ti64/errors.hpp"

namespace ti64 {

struct LMConfig {
  double initial_damping = 1e-3;
  double damping_up = 10.0;
  double damping_down = 0.1;
  int max_iters = 200;
  double grad_tol = 1e-8;   ///< infinity norm of J^T r
  double step_tol = 1e-10;  ///< relative parameter step of an accepted move
  double fd_rel_step = 1e-6;
  double damping_max = 1e12;

  void validate() const {
    if (!(initial_damping > 0 && damping_up > 1 && damping_down > 0 &&
          damping_down < 1 && max_iters > 0 && grad_tol > 0 && step_tol > 0 &&
          fd_rel_step > 0))
      throw std::invalid_argument("invalid LM configuration");
  }
};

struct LMResult {
  std::vector<double> theta;
  double cost = 0.0;  ///< 0.5 * sum of squared residuals
  int iterations = 0;
  bool converged = false;
};

using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;

namespace detail {

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < 1e-300)
      throw CalibrationError("singular normal equations");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double m = a[r][col] / a[col][col];
      if (m == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= m * a[col][c];
      b[r] -= m * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t row = n; row-- > 0;) {
    double s = b[row];
    for (std::size_t c = row + 1; c < n; ++c) s -= a[row][c] * x[c];
    x[row] = s / a[row][row];
  }
  return x;
}

inline double half_ssq(const std::vector<double>& r, const std::vector<double>& theta) {
  double s = 0.0;
  for (double v : r) {
    if (!std::isfinite(v)) {
      std::string msg = "non-finite residual at theta = [";
      for (std::size_t i = 0; i < theta.size(); ++i)
        msg += (i ? ", " : "") + std::to_string(theta[i]);
      throw CalibrationError(msg + "]");
    }
    s += v * v;
  }
  return 0.5 * s;
}

}  // namespace detail

/// Damped least squares with a forward-difference Jacobian. Box bounds are
/// enforced by rejecting any trial step that leaves the box, which raises the
/// damping until the step shrinks back inside. Running out of iterations
/// yields converged=false, not an exception.
inline LMResult levenberg_marquardt(const ResidualFn& residuals,
                                    std::vector<double> theta0,
                                    const std::vector<double>& lower,
                                    const std::vector<double>& upper,
                                    const LMConfig& cfg = {}) {
  cfg.validate();
  const std::size_t n = theta0.size();
  if (lower.size() != n || upper.size() != n)
    throw std::invalid_argument("bound size mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (!(lower[i] <= theta0[i] && theta0[i] <= upper[i]))
      throw std::invalid_argument("initial guess outside bounds");

  LMResult res;
  res.theta = std::move(theta0);
  std::vector<double> r = residuals(res.theta);
  res.cost = detail::half_ssq(r, res.theta);
  double lambda = cfg.initial_damping;

  for (res.iterations = 0; res.iterations < cfg.max_iters && !res.converged;) {
    ++res.iterations;
    const std::size_t m = r.size();
    std::vector<std::vector<double>> jac(m, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
      double h = cfg.fd_rel_step * std::max(std::fabs(res.theta[j]), 1e-8);
      if (res.theta[j] + h > upper[j]) h = -h;
      std::vector<double> tp = res.theta;
      tp[j] += h;
      const std::vector<double> rp = residuals(tp);
      if (rp.size() != m) throw CalibrationError("residual size changed");
      for (std::size_t i = 0; i < m; ++i) jac[i][j] = (rp[i] - r[i]) / h;
    }

    std::vector<std::vector<double>> jtj(n, std::vector<double>(n, 0.0));
    std::vector<double> grad(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        grad[j] += jac[i][j] * r[i];
        for (std::size_t k = j; k < n; ++k) jtj[j][k] += jac[i][j] * jac[i][k];
      }
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < j; ++k) jtj[j][k] = jtj[k][j];

    double grad_inf = 0.0;
    for (double g : grad) grad_inf = std::max(grad_inf, std::fabs(g));
    if (grad_inf < cfg.grad_tol) {
      res.converged = true;
      break;
    }

    bool accepted = false;
    while (lambda <= cfg.damping_max) {
      std::vector<std::vector<double>> a = jtj;
      for (std::size_t j = 0; j < n; ++j)
        a[j][j] += lambda * std::max(jtj[j][j], 1e-12);
      std::vector<double> b(n);
      for (std::size_t j = 0; j < n; ++j) b[j] = -grad[j];

      std::vector<double> step;
      try {
        step = detail::solve_dense(std::move(a), std::move(b));
      } catch (const CalibrationError&) {
        lambda *= cfg.damping_up;
        continue;
      }

      std::vector<double> trial = res.theta;
      bool in_bounds = true;
      double step_norm = 0.0, theta_norm = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        trial[j] += step[j];
        in_bounds = in_bounds && lower[j] <= trial[j] && trial[j] <= upper[j];
        step_norm += step[j] * step[j];
        theta_norm += res.theta[j] * res.theta[j];
      }
      if (!in_bounds) {
        lambda *= cfg.damping_up;
        continue;
      }

      std::vector<double> r_trial = residuals(trial);
      const double cost_trial = detail::half_ssq(r_trial, trial);
      if (cost_trial >= res.cost) {
        lambda *= cfg.damping_up;
        continue;
      }

      const double rel_step =
          std::sqrt(step_norm) / std::max(std::sqrt(theta_norm), 1e-300);
      res.theta = std::move(trial);
      r = std::move(r_trial);
      res.cost = cost_trial;
      lambda = std::max(lambda * cfg.damping_down, 1e-14);
      accepted = true;
      if (rel_step < cfg.step_tol) res.converged = true;
      break;
    }
    // no improving step at any damping level: theta is stationary
    if (!accepted) res.converged = true;
  }
  return res;
}

}  // namespace ti64
