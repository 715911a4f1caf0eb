#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "bpp/chain.hpp"
#include "bpp/errors.hpp"
#include "bpp/time_grid.hpp"
#include "bpp/util.hpp"

namespace bpp {

struct FBResult {
  double log_marginal_lik = 0.0;
  Eigen::MatrixXd log_alpha, log_beta;    // (n+1) x k
  Eigen::MatrixXd marginals;              // (n+1) x k, rows sum to 1
  std::vector<Eigen::MatrixXd> pairwise;  // n matrices k x k, optional
};

/* Forward-backward over an arbitrary per-step log transition tensor.
     alpha_j(0)   = loglik(0, j) for j = 1, -inf otherwise
     alpha_h(i)   = loglik(i, h) + logsumexp_j alpha_j(i-1) + log P_i(j, h)
     log m(y)     = logsumexp_h alpha_h(n)
     beta_j(n)    = 0
     beta_j(i)    = logsumexp_h log P_(i+1)(j, h) + loglik(i+1, h) + beta_h(i+1)
   Posterior marginals and adjacent-pair probabilities follow by
   exponentiating alpha + beta - log m(y). */
inline FBResult fb_core(const Eigen::MatrixXd& loglik,
                        const std::vector<Eigen::MatrixXd>& tensor,
                        bool want_pairwise = true) {
  const int n_obs = static_cast<int>(loglik.rows());
  const int k = static_cast<int>(loglik.cols());
  if (n_obs < 1 || k < 1) throw invalid_input("forward_backward: empty inputs");
  if (static_cast<int>(tensor.size()) != n_obs - 1)
    throw invalid_input("forward_backward: tensor length must be n");
  for (int i = 0; i < n_obs; ++i)
    for (int j = 0; j < k; ++j)
      if (std::isnan(loglik(i, j)) || loglik(i, j) == -neg_inf)
        throw invalid_input("forward_backward: non-finite log likelihood at row " +
                            std::to_string(i));

  FBResult r;
  r.log_alpha = Eigen::MatrixXd::Constant(n_obs, k, neg_inf);
  r.log_beta = Eigen::MatrixXd::Zero(n_obs, k);
  r.log_alpha(0, 0) = loglik(0, 0);

  std::vector<double> acc(k);
  for (int i = 1; i < n_obs; ++i) {
    const Eigen::MatrixXd& lp = tensor[i - 1];
    for (int h = 0; h < k; ++h) {
      for (int j = 0; j < k; ++j) acc[j] = r.log_alpha(i - 1, j) + lp(j, h);
      r.log_alpha(i, h) = loglik(i, h) + logsumexp(acc);
    }
    if (r.log_alpha.row(i).maxCoeff() == neg_inf)
      throw numeric_failure("forward_backward: forward mass vanished at observation " +
                            std::to_string(i));
  }
  {
    std::vector<double> last(k);
    for (int j = 0; j < k; ++j) last[j] = r.log_alpha(n_obs - 1, j);
    r.log_marginal_lik = logsumexp(last);
  }

  for (int i = n_obs - 2; i >= 0; --i) {
    const Eigen::MatrixXd& lp = tensor[i];
    for (int j = 0; j < k; ++j) {
      for (int h = 0; h < k; ++h)
        acc[h] = lp(j, h) + loglik(i + 1, h) + r.log_beta(i + 1, h);
      r.log_beta(i, j) = logsumexp(acc);
    }
  }

  r.marginals.resize(n_obs, k);
  for (int i = 0; i < n_obs; ++i)
    for (int j = 0; j < k; ++j)
      r.marginals(i, j) =
          std::exp(r.log_alpha(i, j) + r.log_beta(i, j) - r.log_marginal_lik);

  if (want_pairwise) {
    r.pairwise.reserve(n_obs - 1);
    for (int i = 0; i + 1 < n_obs; ++i) {
      Eigen::MatrixXd pr(k, k);
      const Eigen::MatrixXd& lp = tensor[i];
      for (int j = 0; j < k; ++j)
        for (int h = 0; h < k; ++h)
          pr(j, h) = lp(j, h) == neg_inf
                         ? 0.0
                         : std::exp(r.log_alpha(i, j) + lp(j, h) + loglik(i + 1, h) +
                                    r.log_beta(i + 1, h) - r.log_marginal_lik);
      r.pairwise.push_back(std::move(pr));
    }
  }
  return r;
}

/* Forward-backward under the continuous-time change point chain on a grid. */
inline FBResult forward_backward(int k, const TimeGrid& grid,
                                 const Eigen::MatrixXd& loglik,
                                 bool want_pairwise = true) {
  if (k < 1) throw invalid_input("forward_backward: k must be >= 1");
  if (static_cast<std::size_t>(loglik.rows()) != grid.size())
    throw invalid_input("forward_backward: loglik rows must match grid length");
  if (static_cast<int>(loglik.cols()) != k)
    throw invalid_input("forward_backward: loglik columns must equal k");
  return fb_core(loglik, log_transition_tensor(grid, k), want_pairwise);
}

}  // namespace bpp
