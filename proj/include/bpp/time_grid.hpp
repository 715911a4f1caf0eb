#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "bpp/errors.hpp"

namespace bpp {

/* Observation times.  Raw times are day counts; standardized times live in
   [0, 1) via t_i = (tau_i - tau_0) / (tau_n - tau_0) * n / (n+1), which places
   t_0 = 0 and keeps t_n strictly below one so that the final state is never
   pinned by the continuous-time chain.  The unscaled map (tau - tau_0) / span
   is kept alongside as the design time: it reaches 1 at the last observation
   and carries the harmonic phase. */
class TimeGrid {
 public:
  static TimeGrid from_raw(std::vector<double> raw_days) {
    if (raw_days.empty()) throw invalid_input("time grid: no observations");
    for (std::size_t i = 0; i < raw_days.size(); ++i) {
      if (!std::isfinite(raw_days[i]))
        throw invalid_input("time grid: non-finite time at row " + std::to_string(i));
      if (i > 0 && raw_days[i] <= raw_days[i - 1])
        throw invalid_input("time grid: times not strictly increasing at row " +
                            std::to_string(i));
    }
    TimeGrid g;
    g.origin_ = raw_days.front();
    g.span_ = raw_days.back() - raw_days.front();
    const std::size_t n = raw_days.size() - 1;
    g.times_.resize(raw_days.size());
    g.times_[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      g.times_[i] = (raw_days[i] - g.origin_) / g.span_ *
                    (static_cast<double>(n) / static_cast<double>(n + 1));
    return g;
  }

  /* n_obs equally spaced observations; standardized times are exactly
     i / (n_obs). */
  static TimeGrid uniform(std::size_t n_obs, double span_days = 1.0) {
    std::vector<double> raw(n_obs);
    for (std::size_t i = 0; i < n_obs; ++i)
      raw[i] = span_days * static_cast<double>(i) / static_cast<double>(n_obs - 1);
    return from_raw(std::move(raw));
  }

  std::size_t size() const { return times_.size(); }
  std::size_t intervals() const { return times_.size() - 1; }
  const std::vector<double>& times() const { return times_; }
  double time(std::size_t i) const { return times_[i]; }
  double raw_origin() const { return origin_; }
  double raw_span_days() const { return span_; }

  /* (tau_i - tau_0) / span on [0, 1] */
  double design_time(std::size_t i) const {
    const double n = static_cast<double>(intervals());
    return times_[i] * (n + 1.0) / n;
  }

  double day_offset(std::size_t i) const { return design_time(i) * span_; }

  double raw_at(std::size_t i) const { return origin_ + day_offset(i); }

  /* invert an arbitrary standardized time back to raw days */
  double raw_of_time(double t) const {
    const double n = static_cast<double>(intervals());
    return origin_ + t * (n + 1.0) / n * span_;
  }

 private:
  std::vector<double> times_;
  double origin_ = 0.0;
  double span_ = 0.0;
};

}  // namespace bpp
