#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bpp/errors.hpp"
#include "bpp/rng.hpp"
#include "bpp/time_grid.hpp"
#include "bpp/util.hpp"

namespace bpp {

/* State paths are 1-based segment labels, one per observation, non-decreasing
   with z_0 = 1. */
using StatePath = std::vector<int>;

enum class PriorVariant { noninformative, equal_volume };

inline void check_state(int k, int j, const char* what) {
  if (k < 1) throw invalid_input(std::string(what) + ": k must be >= 1");
  if (j < 1 || j > k) throw invalid_input(std::string(what) + ": state out of 1..k");
}

/* P(state = j at time t) = C(k-1, j-1) t^(j-1) (1-t)^(k-j), with 0^0 = 1. */
inline double bernstein_marginal(int k, double t, int j) {
  check_state(k, j, "bernstein_marginal");
  if (!(t >= 0.0 && t <= 1.0))
    throw invalid_input("bernstein_marginal: t outside [0,1]");
  return binom(k - 1, j - 1) * std::pow(t, j - 1) * std::pow(1.0 - t, k - j);
}

inline void check_transition_args(int k, double s, double t, int j, int h,
                                  const char* what) {
  if (k < 1) throw invalid_input(std::string(what) + ": k must be >= 1");
  if (j < 1 || j > k || h < 1 || h > k)
    throw invalid_input(std::string(what) + ": state out of 1..k");
  if (!(s >= 0.0 && s < t && t <= 1.0))
    throw invalid_input(std::string(what) + ": need 0 <= s < t <= 1");
  if (s >= 1.0 && j < k)
    throw invalid_input(std::string(what) + ": s = 1 pins the state at k");
}

/* P(state h at t | state j at s) = C(k-j, h-j) ((t-s)/(1-s))^(h-j)
   ((1-t)/(1-s))^(k-h); zero when h < j. */
inline double continuous_transition(int k, double s, double t, int j, int h) {
  check_transition_args(k, s, t, j, h, "continuous_transition");
  if (h < j) return 0.0;
  const double adv = (t - s) / (1.0 - s);
  const double stay = (1.0 - t) / (1.0 - s);
  return binom(k - j, h - j) * std::pow(adv, h - j) * std::pow(stay, k - h);
}

inline double log_continuous_transition(int k, double s, double t, int j, int h) {
  check_transition_args(k, s, t, j, h, "log_continuous_transition");
  if (h < j) return neg_inf;
  const double adv = (t - s) / (1.0 - s);
  const double stay = (1.0 - t) / (1.0 - s);
  return log_binom(k - j, h - j) + xlogy(h - j, adv) + xlogy(k - h, stay);
}

inline void check_path(const StatePath& path, std::size_t n_obs, int k,
                       const char* what) {
  if (path.size() != n_obs)
    throw invalid_input(std::string(what) + ": path length != grid length");
  if (path.empty() || path.front() != 1)
    throw invalid_input(std::string(what) + ": path must start in state 1");
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i] < 1 || path[i] > k)
      throw invalid_input(std::string(what) + ": state out of 1..k at index " +
                          std::to_string(i));
    if (i > 0 && path[i] < path[i - 1])
      throw invalid_input(std::string(what) + ": path decreases at index " +
                          std::to_string(i));
  }
}

/* Log prior of a full path under the k-segment process: sum of log transition
   kernels along consecutive grid times.  k = 1 gives 0. */
inline double log_bpp_prior(const StatePath& path, const TimeGrid& grid, int k) {
  check_path(path, grid.size(), k, "log_bpp_prior");
  double lp = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i)
    lp += log_continuous_transition(k, grid.time(i - 1), grid.time(i),
                                    path[i - 1], path[i]);
  return lp;
}

/* Discrete-index chain on n intervals: P(z_i = j) =
   C(n-i, k-j) C(i, j-1) / C(n, k-1) (change configurations uniform over the
   C(n, k-1) subsets; the chain is forced into state k at i = n). */
inline double discrete_marginal(int n, int k, int i, int j) {
  check_state(k, j, "discrete_marginal");
  if (n < 1 || i < 0 || i > n)
    throw invalid_input("discrete_marginal: need 0 <= i <= n, n >= 1");
  if (k - 1 > n)
    throw invalid_input("discrete_marginal: k - 1 changes cannot fit in n intervals");
  const double lp =
      log_binom(n - i, k - j) + log_binom(i, j - 1) - log_binom(n, k - 1);
  return std::isfinite(lp) ? std::exp(lp) : 0.0;
}

/* Self-transition P(z_i = j | z_(i-1) = j).  Advancing moves to j+1 with the
   complementary probability; equals [sum_(l<=j) P(z_i = l) -
   sum_(l<j) P(z_(i-1) = l)] / P(z_(i-1) = j), computed here through the
   cancellation-free ratio C(n-i, k-j) / C(n-i+1, k-j). */
inline double discrete_transition(int n, int k, int i, int j) {
  check_state(k, j, "discrete_transition");
  if (n < 1 || i < 1 || i > n)
    throw invalid_input("discrete_transition: need 1 <= i <= n, n >= 1");
  if (discrete_marginal(n, k, i - 1, j) <= 0.0)
    throw invalid_input("discrete_transition: conditioning state has mass zero");
  if (j == k) return 1.0;
  const double lr = log_binom(n - i, k - j) - log_binom(n - i + 1, k - j);
  return std::isfinite(lr) ? std::exp(lr) : 0.0;
}

/* Log prior mass on the number of segments.  The noninformative variant
   shrinks toward few segments:
     -(p k / 2) log(2 pi) + (k / 2) log_det_prior_precision
       + k sum_i log((1 - t_i) / (1 - t_(i-1)));
   equal_volume is its negation (every segment count carries equal parameter
   volume). */
inline double log_prior_num_segments(int k, const TimeGrid& grid, int p,
                                     double log_det_prior_precision,
                                     PriorVariant variant) {
  if (k < 1) throw invalid_input("log_prior_num_segments: k must be >= 1");
  if (p < 0) throw invalid_input("log_prior_num_segments: p must be >= 0");
  const double time_term = std::log1p(-grid.times().back()) - std::log1p(-grid.times().front());
  const double lp = -0.5 * p * k * std::log(2.0 * M_PI) +
                    0.5 * k * log_det_prior_precision + k * time_term;
  return variant == PriorVariant::noninformative ? lp : -lp;
}

/* Segment lengths zeta ~ Dirichlet(1,...,1) via normalized exponentials. */
inline std::vector<double> sample_segment_lengths(int k, Rng& rng) {
  if (k < 1) throw invalid_input("sample_segment_lengths: k must be >= 1");
  std::vector<double> z(k);
  double s = 0.0;
  for (int j = 0; j < k; ++j) {
    z[j] = rng.exponential();
    s += z[j];
  }
  for (int j = 0; j < k; ++j) z[j] /= s;
  return z;
}

/* Uniform draw of k-1 change positions from {1..n} without replacement,
   order statistics returned ascending.  Sequential inverse-cdf on the
   first-gap law p(gap = i) = J/(n-i+1) * C(n-J, i-1)/C(n, i-1) with J
   remaining changes, then recurse on the tail. */
inline std::vector<int> sample_discrete_changepoints(int n, int k, Rng& rng) {
  if (k < 1 || n < 1 || k - 1 > n)
    throw invalid_input("sample_discrete_changepoints: need 0 <= k-1 <= n");
  std::vector<int> out;
  out.reserve(k - 1);
  int base = 0, m = n, remaining = k - 1;
  while (remaining > 0) {
    const double u = rng.uniform();
    double p = static_cast<double>(remaining) / m;  // gap = 1
    double acc = p;
    int gap = 1;
    while (acc < u && gap < m - remaining + 1) {
      p *= static_cast<double>(m - remaining - gap + 1) / (m - gap);
      acc += p;
      ++gap;
    }
    out.push_back(base + gap);
    base += gap;
    m -= gap;
    --remaining;
  }
  return out;
}

/* Per-step log transition matrices for the continuous-time chain on a grid:
   tensor[i-1](j-1, h-1) = log P(z_i = h | z_(i-1) = j). */
inline std::vector<Eigen::MatrixXd> log_transition_tensor(const TimeGrid& grid,
                                                          int k) {
  std::vector<Eigen::MatrixXd> tensor;
  tensor.reserve(grid.intervals());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    Eigen::MatrixXd m(k, k);
    for (int j = 1; j <= k; ++j)
      for (int h = 1; h <= k; ++h)
        m(j - 1, h - 1) =
            h < j ? neg_inf
                  : log_continuous_transition(k, grid.time(i - 1), grid.time(i), j, h);
    tensor.push_back(std::move(m));
  }
  return tensor;
}

/* Same shape for the discrete-index chain; mass only on stay/advance. */
inline std::vector<Eigen::MatrixXd> discrete_log_transition_tensor(int n, int k) {
  std::vector<Eigen::MatrixXd> tensor;
  tensor.reserve(n);
  for (int i = 1; i <= n; ++i) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(k, k, neg_inf);
    for (int j = 1; j <= k; ++j) {
      if (discrete_marginal(n, k, i - 1, j) <= 0.0) continue;
      const double stay = discrete_transition(n, k, i, j);
      m(j - 1, j - 1) = stay > 0.0 ? std::log(stay) : neg_inf;
      if (j < k) {
        const double adv = 1.0 - stay;
        m(j - 1, j) = adv > 0.0 ? std::log(adv) : neg_inf;
      }
    }
    tensor.push_back(std::move(m));
  }
  return tensor;
}

}  // namespace bpp
