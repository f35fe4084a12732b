#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "ti64/errors.hpp"

namespace ti64 {

/// Queryable temperature history T(t) on [0, end_time], with rate access.
/// Backed either by a closed form or by a monotone-time sample table with
/// linear interpolation. Queries outside the domain clamp to the endpoints.
class TemperaturePath {
 public:
  TemperaturePath() = default;

  static TemperaturePath analytic(std::function<double(double)> temp, double t_end) {
    TemperaturePath p;
    p.temp_fn_ = std::move(temp);
    p.t_end_ = t_end;
    return p;
  }

  static TemperaturePath analytic(std::function<double(double)> temp,
                                  std::function<double(double)> rate, double t_end) {
    TemperaturePath p = analytic(std::move(temp), t_end);
    p.rate_fn_ = std::move(rate);
    return p;
  }

  static TemperaturePath sampled(std::vector<double> times, std::vector<double> temps) {
    if (times.size() != temps.size() || times.empty())
      throw ParseError("sampled path needs matching, nonempty time/temperature columns");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1]))
        throw ParseError("sample times must be strictly increasing");
    for (double t : temps)
      if (!std::isfinite(t)) throw ParseError("non-finite temperature sample");
    TemperaturePath p;
    p.times_ = std::move(times);
    p.temps_ = std::move(temps);
    p.t_end_ = p.times_.back();
    return p;
  }

  bool is_sampled() const { return !times_.empty(); }
  double end_time() const { return t_end_; }

  double temperature(double t) const {
    if (is_sampled()) {
      if (t <= times_.front()) return temps_.front();
      if (t >= times_.back()) return temps_.back();
      const auto it = std::upper_bound(times_.begin(), times_.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - times_.begin());
      const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
      return temps_[i - 1] + w * (temps_[i] - temps_[i - 1]);
    }
    return temp_fn_(std::clamp(t, 0.0, t_end_));
  }

  /// dT/dt: piecewise segment slope for sampled paths, supplied closed form or
  /// central finite difference otherwise.
  double rate(double t) const {
    if (is_sampled()) {
      if (times_.size() < 2) return 0.0;
      if (t <= times_.front()) t = times_.front();
      if (t >= times_.back()) return segment_slope(times_.size() - 1);
      const auto it = std::upper_bound(times_.begin(), times_.end(), t);
      return segment_slope(static_cast<std::size_t>(it - times_.begin()));
    }
    if (rate_fn_) return rate_fn_(std::clamp(t, 0.0, t_end_));
    const double h = 1e-4;
    const double lo = std::max(0.0, t - h);
    const double hi = std::min(t_end_, t + h);
    if (hi <= lo) return 0.0;
    return (temp_fn_(hi) - temp_fn_(lo)) / (hi - lo);
  }

  const std::vector<double>& sample_times() const { return times_; }
  const std::vector<double>& sample_temps() const { return temps_; }

 private:
  double segment_slope(std::size_t i) const {
    return (temps_[i] - temps_[i - 1]) / (times_[i] - times_[i - 1]);
  }

  std::function<double(double)> temp_fn_;
  std::function<double(double)> rate_fn_;
  std::vector<double> times_;
  std::vector<double> temps_;
  double t_end_ = 0.0;
};

}  // namespace ti64
