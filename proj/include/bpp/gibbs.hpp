#pragma once

// Full posterior simulation: systematic-scan Gibbs sweeps over the latent
// path (exact backward sampling through the filtered chain), the latent
// precision scales, the regression coefficients (joint Gaussian block), and
// the residual variance (scaled inverse chi-squared).

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bpp/chain.hpp"
#include "bpp/design.hpp"
#include "bpp/em.hpp"
#include "bpp/errors.hpp"
#include "bpp/likelihood.hpp"
#include "bpp/rng.hpp"
#include "bpp/time_grid.hpp"
#include "bpp/util.hpp"

namespace bpp {

struct GibbsOptions {
  int iters = 2000;
  int burnin = 500;
  int thin = 2;
  std::uint64_t seed = 0;
};

struct GibbsState {
  SegmentParams params;
  Eigen::VectorXd q;  // latent precision scale per observation, 1 when gaussian
  StatePath path;
  int iteration = 0;
};

struct GibbsTrace {
  std::vector<GibbsState> draws;
  std::vector<double> log_joint;  // per kept draw, up to one additive constant
  int k = 1;
};

namespace detail {

inline Eigen::MatrixXd hard_weights(const GibbsState& st) {
  const int n_obs = static_cast<int>(st.q.size());
  const int k = static_cast<int>(st.params.theta.cols());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n_obs, k);
  for (int i = 0; i < n_obs; ++i) w(i, st.path[i] - 1) = st.q[i];
  return w;
}

inline Eigen::VectorXd path_residuals(const GibbsState& st, const Eigen::VectorXd& y,
                                      const DesignBundle& b) {
  const Eigen::MatrixXd mu = segment_means(y, b, st.params);
  Eigen::VectorXd r(y.size());
  for (int i = 0; i < y.size(); ++i) r[i] = y[i] - mu(i, st.path[i] - 1);
  return r;
}

}  // namespace detail

/* Joint draw of (theta_1..theta_k, phi) from the Gaussian conditional with
   precision (A' W A + blkdiag(Lambda_theta x k, Lambda_phi)) / sigma2, where
   W is diagonal with q_i on the row of the occupied segment. */
inline void sample_theta_phi(GibbsState* st, const Eigen::VectorXd& y,
                             const DesignBundle& b, Rng& rng) {
  const int k = static_cast<int>(st->params.theta.cols());
  const int dim = k * b.p + b.p_phi;
  Eigen::MatrixXd normal;
  Eigen::VectorXd rhs;
  detail::build_normal_equations(y, b, detail::hard_weights(*st), &normal, &rhs);

  const Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success)
    throw numeric_failure(
        "sample_theta_phi: conditional precision is not positive definite "
        "(a sampled segment holds fewer rows than flat-prior coefficients; "
        "the series may not support this many segments)");
  const Eigen::VectorXd mean = llt.solve(rhs);

  Eigen::VectorXd z(dim);
  for (int i = 0; i < dim; ++i) z[i] = rng.normal();
  // x = mean + sigma L^{-T} z has covariance sigma2 (A'WA + Lambda)^{-1}
  const Eigen::VectorXd u =
      mean + std::sqrt(st->params.sigma2) *
                 llt.matrixU().solve(z);
  for (int j = 0; j < k; ++j) st->params.theta.col(j) = u.segment(j * b.p, b.p);
  if (b.p_phi > 0) st->params.phi = u.segment(k * b.p, b.p_phi);
}

/* sigma2 | rest ~ scaled-inv-chi2(nu0, tau0^2) with nu0 = n_obs + p k and
   nu0 tau0^2 = sum_i q_i r_i^2 + sum_j theta_j' Lambda_theta theta_j +
   phi' Lambda_phi phi; sampled as nu0 tau0^2 / chi2(nu0). */
inline void sample_sigma2(GibbsState* st, const Eigen::VectorXd& y, const DesignBundle& b,
                          Rng& rng) {
  const int k = static_cast<int>(st->params.theta.cols());
  const double nu0 = static_cast<double>(y.size()) + b.p * k;
  const Eigen::VectorXd r = detail::path_residuals(*st, y, b);
  const double scale = r.cwiseAbs2().dot(st->q) +
                       detail::penalty_quadratic(b, st->params.theta, st->params.phi);
  st->params.sigma2 = std::max(scale / rng.chi_squared(nu0), 1e-12);
}

/* q_i | rest ~ Gamma((nu+1)/2, nu/2 + r_i^2 / (2 sigma2)) independently. */
inline void sample_q(GibbsState* st, const Eigen::VectorXd& y, const DesignBundle& b,
                     double nu, Rng& rng) {
  const Eigen::VectorXd r = detail::path_residuals(*st, y, b);
  for (int i = 0; i < y.size(); ++i) {
    const auto [shape, rate] = q_posterior(r[i], st->params.sigma2, nu);
    st->q[i] = rng.gamma(shape, rate);
  }
}

/* Exact conditional path draw: forward filter in log space with Gaussian
   observation noise sigma2 / q_i, then a backward categorical draw through
   the per-step transition matrices. */
inline void sample_path(GibbsState* st, const Eigen::VectorXd& y, const DesignBundle& b,
                        const std::vector<Eigen::MatrixXd>& tensor, Rng& rng) {
  const int n_obs = static_cast<int>(y.size());
  const int k = static_cast<int>(st->params.theta.cols());
  const Eigen::MatrixXd mu = segment_means(y, b, st->params);

  Eigen::MatrixXd loglik(n_obs, k);
  for (int i = 0; i < n_obs; ++i)
    for (int j = 0; j < k; ++j)
      loglik(i, j) = gaussian_logpdf(y[i], mu(i, j), st->params.sigma2 / st->q[i]);

  Eigen::MatrixXd f = Eigen::MatrixXd::Constant(n_obs, k, neg_inf);
  f(0, 0) = loglik(0, 0);
  for (int i = 1; i < n_obs; ++i) {
    for (int h = 0; h < k; ++h) {
      double acc = neg_inf;
      for (int j = 0; j <= h; ++j) acc = logaddexp(acc, f(i - 1, j) + tensor[i - 1](j, h));
      f(i, h) = loglik(i, h) + acc;
    }
    if (!(f.row(i).maxCoeff() > neg_inf))
      throw numeric_failure("sample_path: filter mass vanished at observation " +
                            std::to_string(i));
  }

  auto draw_from = [&](const Eigen::VectorXd& logw) {
    std::vector<double> v(logw.data(), logw.data() + logw.size());
    const double norm = logsumexp(v);
    const double u = rng.uniform();
    double acc = 0.0;
    for (int j = 0; j < logw.size(); ++j) {
      acc += std::exp(logw[j] - norm);
      if (u <= acc) return j;
    }
    return static_cast<int>(logw.size()) - 1;
  };

  st->path[n_obs - 1] = draw_from(f.row(n_obs - 1).transpose()) + 1;
  for (int i = n_obs - 2; i >= 0; --i) {
    const int next = st->path[i + 1] - 1;
    Eigen::VectorXd logw(next + 1);
    for (int j = 0; j <= next; ++j) logw[j] = f(i, j) + tensor[i](j, next);
    st->path[i] = draw_from(logw) + 1;
  }
}

/* Log joint density of (y, q, z, theta, phi, sigma2) at the current state,
   up to the additive constant collecting the positive prior-precision
   normalizers; used as a mixing diagnostic in the exported trace. */
inline double gibbs_log_joint(const GibbsState& st, const Eigen::VectorXd& y,
                              const DesignBundle& b, const TimeGrid& grid,
                              const RobustConfig& cfg) {
  const int k = static_cast<int>(st.params.theta.cols());
  const Eigen::VectorXd r = detail::path_residuals(st, y, b);
  double lp = log_bpp_prior(st.path, grid, k);
  for (int i = 0; i < y.size(); ++i)
    lp += gaussian_logpdf(r[i], 0.0, st.params.sigma2 / st.q[i]);
  if (cfg.mode == LikelihoodMode::robust_t) {
    const double a = 0.5 * cfg.nu;
    for (int i = 0; i < y.size(); ++i)
      lp += a * std::log(a) - std::lgamma(a) + (a - 1.0) * std::log(st.q[i]) -
            a * st.q[i];
  }
  lp += -0.5 * (b.p * k + 2.0) * std::log(st.params.sigma2) -
        0.5 * detail::penalty_quadratic(b, st.params.theta, st.params.phi) /
            st.params.sigma2;
  return lp;
}

/* Systematic scan (z, q, theta phi, sigma2); draws kept after burn-in at the
   thinning stride. Deterministic given the seed. */
inline GibbsTrace gibbs_run(const Eigen::VectorXd& y, const TimeGrid& grid,
                            const DesignBundle& b, int k, const RobustConfig& cfg = {},
                            const GibbsOptions& opts = {}) {
  const int n_obs = static_cast<int>(y.size());
  if (k < 1) throw invalid_input("gibbs_run: k must be >= 1");
  if (b.X.rows() != n_obs) throw invalid_input("gibbs_run: design rows != series length");
  if (n_obs < b.p + 2) throw invalid_input("gibbs_run: need at least p + 2 observations");
  if (!y.allFinite()) throw invalid_input("gibbs_run: non-finite observations");
  if (opts.iters < 1 || opts.burnin < 0 || opts.thin < 1 || opts.burnin >= opts.iters)
    throw invalid_input("gibbs_run: need iters > burnin >= 0 and thin >= 1");

  const auto tensor = log_transition_tensor(grid, k);
  Rng rng(derive_seed(opts.seed, "gibbs", k));

  GibbsState st;
  st.params = detail::ridge_init(y, b, k);
  st.q = Eigen::VectorXd::Ones(n_obs);
  // Warm start anchored at the deterministic EM fit.  The first scan samples
  // z given theta, so theta must already separate the segments the data
  // support: from a ridge start (equal columns) or an evenly split path the
  // drawn path routinely strands a segment with fewer rows than coefficients
  // and trips the non-SPD error before the chain can move.  The EM smoother
  // marginals give a monotone median path; theta phi start at the conditional
  // mean under that path (falling back to the EM coefficients when the path
  // does not populate every segment).  No RNG is consumed, so seeded traces
  // stay deterministic.
  st.path.resize(n_obs);
  for (int i = 0; i < n_obs; ++i)
    st.path[i] = 1 + static_cast<int>(static_cast<long long>(i) * k / n_obs);
  try {
    EmOptions warm;
    warm.max_iter = 200;
    const FitResult fit = em_fit(y, b, tensor, k, cfg, warm);
    st.params = fit.params;
    for (int i = 0; i < n_obs; ++i) {
      double cdf = 0.0;
      for (int j = 1; j <= k; ++j) {
        cdf += fit.fb.marginals(i, j - 1);
        if (cdf >= 0.5) {
          st.path[i] = j;
          break;
        }
      }
    }
    for (int i = 1; i < n_obs; ++i) st.path[i] = std::max(st.path[i], st.path[i - 1]);
  } catch (const std::exception&) {
    // keep the evenly split path and ridge coefficients
  }
  {
    Eigen::MatrixXd normal;
    Eigen::VectorXd rhs;
    detail::build_normal_equations(y, b, detail::hard_weights(st), &normal, &rhs);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    const Eigen::VectorXd u = ldlt.solve(rhs);
    if (ldlt.info() == Eigen::Success && u.allFinite() &&
        (normal * u - rhs).norm() <= 1e-8 * (1.0 + rhs.norm())) {
      for (int j = 0; j < k; ++j) st.params.theta.col(j) = u.segment(j * b.p, b.p);
      if (b.p_phi > 0) st.params.phi = u.segment(k * b.p, b.p_phi);
    }
  }

  GibbsTrace trace;
  trace.k = k;
  trace.draws.reserve((opts.iters - opts.burnin) / opts.thin);
  for (int it = 1; it <= opts.iters; ++it) {
    st.iteration = it;
    sample_path(&st, y, b, tensor, rng);
    if (cfg.mode == LikelihoodMode::robust_t) sample_q(&st, y, b, cfg.nu, rng);
    sample_theta_phi(&st, y, b, rng);
    sample_sigma2(&st, y, b, rng);
    if (it > opts.burnin && (it - opts.burnin) % opts.thin == 0) {
      trace.draws.push_back(st);
      trace.log_joint.push_back(gibbs_log_joint(st, y, b, grid, cfg));
    }
  }
  return trace;
}

}  // namespace bpp
