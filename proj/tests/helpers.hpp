#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "bpp/chain.hpp"

namespace helpers {

/* every non-decreasing path z_0..z_n with z_0 = 1 and states in 1..k */
inline std::vector<bpp::StatePath> enumerate_paths(std::size_t n_obs, int k) {
  std::vector<bpp::StatePath> out;
  bpp::StatePath cur{1};
  std::function<void()> rec = [&] {
    if (cur.size() == n_obs) {
      out.push_back(cur);
      return;
    }
    for (int z = cur.back(); z <= k; ++z) {
      cur.push_back(z);
      rec();
      cur.pop_back();
    }
  };
  rec();
  return out;
}

/* stay/advance paths over n steps, z_0 = 1, terminating in state k */
inline std::vector<bpp::StatePath> enumerate_stay_advance(int n, int k) {
  std::vector<bpp::StatePath> out;
  bpp::StatePath cur{1};
  std::function<void()> rec = [&] {
    if (static_cast<int>(cur.size()) == n + 1) {
      if (cur.back() == k) out.push_back(cur);
      return;
    }
    for (int step = 0; step <= 1; ++step) {
      if (cur.back() + step > k) break;
      cur.push_back(cur.back() + step);
      rec();
      cur.pop_back();
    }
  };
  rec();
  return out;
}

/* exact binomial coefficients for modest n, used as a rational oracle */
inline long double exact_binom(int n, int r) {
  if (r < 0 || r > n) return 0.0L;
  long double v = 1.0L;
  for (int i = 1; i <= std::min(r, n - r); ++i)
    v = v * (n - std::min(r, n - r) + i) / i;
  return v;
}

/* Wilson-Hilferty upper 0.999 quantile of chi-squared */
inline double chi2_quantile_999(int df) {
  const double z = 3.0902323061678132;
  const double a = 2.0 / (9.0 * df);
  const double c = 1.0 - a + z * std::sqrt(a);
  return df * c * c * c;
}

}  // namespace helpers

#include "bpp/em.hpp"

namespace helpers {

/* The objective each M-step maximizes once the E-step weights are frozen:
   -(n + p k + 2)/2 log s2 - (weighted RSS + prior quadratics)/(2 s2). */
inline double em_objective(const Eigen::VectorXd& y, const bpp::DesignBundle& b,
                           const Eigen::MatrixXd& weights,
                           const Eigen::MatrixXd& theta, const Eigen::VectorXd& phi,
                           double sigma2) {
  const int n_obs = static_cast<int>(y.size());
  const int k = static_cast<int>(theta.cols());
  double rss = 0.0;
  Eigen::VectorXd contrast = b.p_phi > 0 ? (b.W * phi).eval() : Eigen::VectorXd();
  for (int i = 0; i < n_obs; ++i)
    for (int j = 0; j < k; ++j) {
      const double mu = b.X.row(i).dot(theta.col(j)) + (b.p_phi > 0 ? contrast[i] : 0.0);
      rss += weights(i, j) * (y[i] - mu) * (y[i] - mu);
    }
  double quad = 0.0;
  for (int j = 0; j < k; ++j) quad += theta.col(j).cwiseAbs2().dot(b.lambda_theta);
  if (b.p_phi > 0) quad += phi.dot(b.lambda_phi * phi);
  return -0.5 * (n_obs + b.p * k + 2.0) * std::log(sigma2) -
         (rss + quad) / (2.0 * sigma2);
}

/* max_i |g_i| max(|x_i|, 1) / max(|f|, 1) via central differences */
inline double relative_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                const Eigen::VectorXd& x) {
  const double f0 = f(x);
  double worst = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double h = std::max(1e-6 * std::fabs(x[i]), 1e-8);
    Eigen::VectorXd lo = x, hi = x;
    lo[i] -= h;
    hi[i] += h;
    const double g = (f(hi) - f(lo)) / (2.0 * h);
    worst = std::max(worst,
                     std::fabs(g) * std::max(std::fabs(x[i]), 1.0) /
                         std::max(std::fabs(f0), 1.0));
  }
  return worst;
}

}  // namespace helpers
