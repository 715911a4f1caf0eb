#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "bpp/design.hpp"
#include "bpp/errors.hpp"
#include "bpp/forward_backward.hpp"
#include "bpp/likelihood.hpp"
#include "bpp/log.hpp"

namespace bpp {

struct EmOptions {
  double tol = 1e-8;  // relative change in log marginal likelihood
  int max_iter = 500;
};

struct FitResult {
  SegmentParams params;        // converged theta, phi, sigma2
  FBResult fb;                 // smoother output at the converged parameters
  Eigen::MatrixXd q_means;     // E[1{z_i = j} q_i], the final E-step weights
  std::vector<double> trace;   // log marginal likelihood per iteration
  /* log marginal likelihood plus the log parameter prior; this is the
     objective the M-steps ascend, so it is non-decreasing up to rounding
     (the raw likelihood alone is not, because sigma2 is shrunk toward the
     posterior mode rather than the maximum-likelihood value) */
  std::vector<double> penalized_trace;
  double log_marginal_lik = 0.0;
  bool converged = false;
  int n_iter = 0;
  int k = 1;
};

namespace detail {

/* Joint penalized normal equations over stacked (theta_1..theta_k, phi):
   (sum_ij w_ij a_ij a_ij' + blkdiag(Lambda_theta x k, Lambda_phi)) u =
   sum_ij w_ij y_i a_ij, with a_ij placing x_i in block j next to w_i. */
inline void build_normal_equations(const Eigen::VectorXd& y, const DesignBundle& b,
                                   const Eigen::MatrixXd& weights,
                                   Eigen::MatrixXd* normal_out, Eigen::VectorXd* rhs_out) {
  const int n_obs = static_cast<int>(y.size());
  const int k = static_cast<int>(weights.cols());
  const int p = b.p, pf = b.p_phi, dim = k * p + pf;

  Eigen::MatrixXd& normal = *normal_out;
  Eigen::VectorXd& rhs = *rhs_out;
  normal = Eigen::MatrixXd::Zero(dim, dim);
  rhs = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < n_obs; ++i) {
    const auto xi = b.X.row(i).transpose();
    double wsum = 0.0;
    for (int j = 0; j < k; ++j) {
      const double w = weights(i, j);
      wsum += w;
      normal.block(j * p, j * p, p, p).noalias() += w * xi * xi.transpose();
      rhs.segment(j * p, p).noalias() += w * y[i] * xi;
    }
    if (pf > 0) {
      const auto wi = b.W.row(i).transpose();
      for (int j = 0; j < k; ++j)
        normal.block(j * p, k * p, p, pf).noalias() +=
            weights(i, j) * xi * wi.transpose();
      normal.block(k * p, k * p, pf, pf).noalias() += wsum * wi * wi.transpose();
      rhs.segment(k * p, pf).noalias() += wsum * y[i] * wi;
    }
  }
  for (int j = 0; j < k; ++j)
    normal.block(j * p, j * p, p, p).diagonal() += b.lambda_theta;
  if (pf > 0) {
    normal.block(k * p, k * p, pf, pf) += b.lambda_phi;
    normal.block(k * p, 0, pf, k * p) =
        normal.block(0, k * p, k * p, pf).transpose();
  }
}

inline void solve_coefficients(const Eigen::VectorXd& y, const DesignBundle& b,
                               const Eigen::MatrixXd& weights, Eigen::MatrixXd* theta,
                               Eigen::VectorXd* phi) {
  const int k = static_cast<int>(weights.cols());
  const int p = b.p, pf = b.p_phi;
  Eigen::MatrixXd normal;
  Eigen::VectorXd rhs;
  build_normal_equations(y, b, weights, &normal, &rhs);

  const Eigen::VectorXd u = normal.ldlt().solve(rhs);
  if (!u.allFinite() ||
      (normal * u - rhs).norm() > 1e-6 * (rhs.norm() + 1.0))
    throw numeric_failure("em_fit: singular normal equations in M-step");
  theta->resize(p, k);
  for (int j = 0; j < k; ++j) theta->col(j) = u.segment(j * p, p);
  *phi = pf > 0 ? u.segment(k * p, pf) : Eigen::VectorXd(0);
}

inline double penalty_quadratic(const DesignBundle& b, const Eigen::MatrixXd& theta,
                                const Eigen::VectorXd& phi) {
  double quad = 0.0;
  for (int j = 0; j < theta.cols(); ++j)
    quad += theta.col(j).cwiseAbs2().dot(b.lambda_theta);
  if (b.p_phi > 0) quad += phi.dot(b.lambda_phi * phi);
  return quad;
}

inline SegmentParams ridge_init(const Eigen::VectorXd& y, const DesignBundle& b, int k) {
  Eigen::MatrixXd theta1;
  Eigen::VectorXd phi;
  solve_coefficients(y, b, Eigen::MatrixXd::Ones(y.size(), 1), &theta1, &phi);

  SegmentParams par;
  par.phi = phi;
  par.theta.resize(b.p, k);
  const double sd = std::sqrt((y.array() - y.mean()).square().mean());
  for (int j = 0; j < k; ++j) {
    par.theta.col(j) = theta1.col(0);
    par.theta(0, j) += (j + 1) * 0.01 * sd;
  }
  Eigen::VectorXd fitted = b.X * theta1.col(0);
  if (b.p_phi > 0) fitted += b.W * phi;
  /* same denominator family as the M-step update so the first iteration does
     not shrink sigma2 (a pure-init shrink would dent the likelihood trace) */
  const double rss = (y - fitted).squaredNorm() + penalty_quadratic(b, par.theta, par.phi);
  par.sigma2 = rss / (y.size() + b.p * k + 2.0);
  if (!(par.sigma2 > 0.0))
    throw numeric_failure("em_fit: zero residual variance at initialization");
  return par;
}

}  // namespace detail

/* Penalized EM for the k-segment model over a fixed log transition tensor.
   E-step: smoother marginals times the conditional precision weight
   (nu+1)/(nu + r^2/sigma2) of each latent scale; M-step: one joint weighted
   ridge solve for all coefficients, then
   sigma2 = (weighted RSS + prior quadratics) / (n_obs + p k + 2). */
inline FitResult em_fit(const Eigen::VectorXd& y, const DesignBundle& b,
                        const std::vector<Eigen::MatrixXd>& tensor, int k,
                        const RobustConfig& cfg = {}, const EmOptions& opts = {}) {
  const int n_obs = static_cast<int>(y.size());
  if (k < 1) throw invalid_input("em_fit: k must be >= 1");
  if (b.X.rows() != n_obs) throw invalid_input("em_fit: design rows != series length");
  if (n_obs < b.p + 2) throw invalid_input("em_fit: need at least p + 2 observations");
  if (!y.allFinite()) throw invalid_input("em_fit: non-finite observations");
  if (opts.max_iter < 1 || !(opts.tol > 0.0))
    throw invalid_input("em_fit: bad optimizer options");

  FitResult fit;
  fit.k = k;
  SegmentParams par = detail::ridge_init(y, b, k);

  const double denom = n_obs + b.p * k + 2.0;
  Eigen::MatrixXd weights(n_obs, k);
  bool warned = false;
  for (int it = 1; it <= opts.max_iter; ++it) {
    fit.n_iter = it;
    const Eigen::MatrixXd ll = loglik_matrix(y, b, par, cfg);
    const FBResult fb = fb_core(ll, tensor, false);
    fit.trace.push_back(fb.log_marginal_lik);
    fit.penalized_trace.push_back(
        fb.log_marginal_lik - 0.5 * (b.p * k + 2.0) * std::log(par.sigma2) -
        0.5 * detail::penalty_quadratic(b, par.theta, par.phi) / par.sigma2);

    const std::size_t m = fit.trace.size();
    if (m >= 2) {
      const double prev = fit.penalized_trace[m - 2];
      const double cur = fit.penalized_trace[m - 1];
      if (!warned && cur + 1e-8 * (1.0 + std::fabs(prev)) < prev) {
        warned = true;
        log_warn("em_fit: penalized objective decreased at iteration " +
                 std::to_string(it));
      }
      const double p0 = fit.trace[m - 2], c0 = fit.trace[m - 1];
      if (std::fabs(c0 - p0) <= opts.tol * (1.0 + std::fabs(p0))) {
        fit.converged = true;
        break;
      }
    }
    if (it == opts.max_iter) break;

    const Eigen::MatrixXd mu = segment_means(y, b, par);
    for (int i = 0; i < n_obs; ++i)
      for (int j = 0; j < k; ++j) {
        double w = fb.marginals(i, j);
        if (cfg.mode == LikelihoodMode::robust_t)
          w *= q_posterior_mean(y[i] - mu(i, j), par.sigma2, cfg.nu);
        weights(i, j) = w;
      }

    detail::solve_coefficients(y, b, weights, &par.theta, &par.phi);
    const Eigen::MatrixXd mu2 = segment_means(y, b, par);
    double rss = 0.0;
    for (int i = 0; i < n_obs; ++i)
      for (int j = 0; j < k; ++j) {
        const double r = y[i] - mu2(i, j);
        rss += weights(i, j) * r * r;
      }
    par.sigma2 = (rss + detail::penalty_quadratic(b, par.theta, par.phi)) / denom;
    if (!(par.sigma2 > 0.0))
      throw numeric_failure("em_fit: residual variance collapsed to zero");
  }

  fit.params = par;
  fit.fb = fb_core(loglik_matrix(y, b, par, cfg), tensor, true);
  fit.log_marginal_lik = fit.fb.log_marginal_lik;
  fit.q_means.resize(n_obs, k);
  const Eigen::MatrixXd mu = segment_means(y, b, par);
  for (int i = 0; i < n_obs; ++i)
    for (int j = 0; j < k; ++j) {
      double w = fit.fb.marginals(i, j);
      if (cfg.mode == LikelihoodMode::robust_t)
        w *= q_posterior_mean(y[i] - mu(i, j), par.sigma2, cfg.nu);
      fit.q_means(i, j) = w;
    }
  return fit;
}

inline FitResult em_fit(const Eigen::VectorXd& y, const TimeGrid& grid,
                        const DesignBundle& b, int k, const RobustConfig& cfg = {},
                        const EmOptions& opts = {}) {
  if (grid.size() != static_cast<std::size_t>(y.size()))
    throw invalid_input("em_fit: grid length != series length");
  return em_fit(y, b, log_transition_tensor(grid, k), k, cfg, opts);
}

}  // namespace bpp
