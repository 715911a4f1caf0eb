#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "bpp/design.hpp"
#include "bpp/errors.hpp"

namespace bpp {

enum class LikelihoodMode { robust_t, gaussian };

struct RobustConfig {
  LikelihoodMode mode = LikelihoodMode::robust_t;
  double nu = 3.0;
};

inline void check_scale(double sigma2, const char* what) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw invalid_input(std::string(what) + ": sigma2 must be positive and finite");
}

/* location-scale Student t */
inline double lst_logpdf(double y, double mu, double sigma2, double nu) {
  check_scale(sigma2, "lst_logpdf");
  if (!(nu > 0.0)) throw invalid_input("lst_logpdf: nu must be > 0");
  const double r2 = (y - mu) * (y - mu) / sigma2;
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * M_PI) - 0.5 * std::log(sigma2) -
         0.5 * (nu + 1.0) * std::log1p(r2 / nu);
}

inline double gaussian_logpdf(double y, double mu, double sigma2) {
  check_scale(sigma2, "gaussian_logpdf");
  const double r = y - mu;
  return -0.5 * std::log(2.0 * M_PI * sigma2) - 0.5 * r * r / sigma2;
}

inline double obs_loglik(double y, double mu, double sigma2, const RobustConfig& cfg) {
  return cfg.mode == LikelihoodMode::robust_t ? lst_logpdf(y, mu, sigma2, cfg.nu)
                                              : gaussian_logpdf(y, mu, sigma2);
}

/* Posterior of the latent precision multiplier q given its observation:
   Gamma(shape, rate) with shape (nu+1)/2 and rate nu/2 + r^2/(2 sigma2). */
inline std::pair<double, double> q_posterior(double resid, double sigma2, double nu) {
  check_scale(sigma2, "q_posterior");
  if (!(nu > 0.0)) throw invalid_input("q_posterior: nu must be > 0");
  return {0.5 * (nu + 1.0), 0.5 * nu + 0.5 * resid * resid / sigma2};
}

inline double q_posterior_mean(double resid, double sigma2, double nu) {
  const auto [shape, rate] = q_posterior(resid, sigma2, nu);
  return shape / rate;
}

struct SegmentParams {
  Eigen::MatrixXd theta;  // p x k, one column per segment
  Eigen::VectorXd phi;    // reduced contrasts, may be empty
  double sigma2 = 1.0;
};

inline Eigen::MatrixXd segment_means(const Eigen::VectorXd& y, const DesignBundle& b,
                                     const SegmentParams& par) {
  const int n_obs = static_cast<int>(y.size());
  const int k = static_cast<int>(par.theta.cols());
  Eigen::MatrixXd mu = b.X * par.theta;  // n_obs x k
  if (b.p_phi > 0) mu.colwise() += (b.W * par.phi).eval();
  (void)n_obs;
  return mu;
}

/* log f(y_i | z_i = j) for every observation and segment */
inline Eigen::MatrixXd loglik_matrix(const Eigen::VectorXd& y, const DesignBundle& b,
                                     const SegmentParams& par, const RobustConfig& cfg) {
  const Eigen::MatrixXd mu = segment_means(y, b, par);
  Eigen::MatrixXd ll(mu.rows(), mu.cols());
  for (int i = 0; i < mu.rows(); ++i)
    for (int j = 0; j < mu.cols(); ++j)
      ll(i, j) = obs_loglik(y[i], mu(i, j), par.sigma2, cfg);
  return ll;
}

}  // namespace bpp
