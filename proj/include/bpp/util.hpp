#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace bpp {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/* log(exp(a) + exp(b)) without overflow; identities with -inf hold. */
inline double logaddexp(double a, double b) {
  if (a == neg_inf) return b;
  if (b == neg_inf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

template <class It>
double logsumexp(It first, It last) {
  double m = neg_inf;
  for (It it = first; it != last; ++it) m = std::max(m, *it);
  if (m == neg_inf) return neg_inf;
  double s = 0.0;
  for (It it = first; it != last; ++it) s += std::exp(*it - m);
  return m + std::log(s);
}

inline double logsumexp(const std::vector<double>& v) {
  return logsumexp(v.begin(), v.end());
}

/* log C(n, r); -inf outside the support so that impossible counts carry
   probability zero. */
inline double log_binom(double n, double r) {
  if (r < 0.0 || r > n) return neg_inf;
  return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

inline double binom(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  r = std::min(r, n - r);
  double v = 1.0;
  for (int i = 1; i <= r; ++i) v *= static_cast<double>(n - r + i) / i;
  return v;
}

/* a * log(x) with the 0^0 = 1 convention: a == 0 yields 0 even when x == 0. */
inline double xlogy(double a, double x) {
  if (a == 0.0) return 0.0;
  return a * std::log(x);
}

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace bpp
