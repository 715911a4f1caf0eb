#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <functional>

#include "bpp/em.hpp"
#include "bpp/rng.hpp"
#include "helpers.hpp"

using namespace bpp;

namespace {
Eigen::VectorXd step_series(const TimeGrid& grid, double delta, int change_at,
                            double sd, Rng& rng) {
  Eigen::VectorXd y(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    y[i] = (static_cast<int>(i) >= change_at ? delta : 0.0) + sd * rng.normal();
  return y;
}
}  // namespace

TEST_CASE("k = 1 gaussian with flat priors reproduces least squares") {
  Rng rng(314);
  const TimeGrid grid = TimeGrid::uniform(60, 2.0 * 365.0);
  HarmonicSpec spec;
  spec.contrasts = false;
  spec.beta_precision = 0.0;
  const DesignBundle b = build_design(grid, spec);
  Eigen::VectorXd truth(b.p);
  truth << 0.4, -0.3, 0.25, 0.1, -0.05, 0.08;
  Eigen::VectorXd y = b.X * truth;
  for (int i = 0; i < y.size(); ++i) y[i] += 0.3 * rng.normal();

  RobustConfig cfg;
  cfg.mode = LikelihoodMode::gaussian;
  EmOptions opts;
  opts.tol = 1e-12;
  const FitResult fit = em_fit(y, grid, b, 1, cfg, opts);

  const Eigen::VectorXd ols = b.X.colPivHouseholderQr().solve(y);
  REQUIRE_THAT((fit.params.theta.col(0) - ols).cwiseAbs().maxCoeff(),
               Catch::Matchers::WithinAbs(0.0, 1e-8));
  const double rss = (y - b.X * ols).squaredNorm();
  REQUIRE_THAT(fit.params.sigma2,
               Catch::Matchers::WithinAbs(rss / (y.size() + b.p + 2.0), 1e-8));
  REQUIRE(fit.converged);
  REQUIRE(static_cast<int>(fit.trace.size()) == fit.n_iter);
}

TEST_CASE("converged parameters are stationary for the penalized objective") {
  Rng rng(2718);
  const TimeGrid grid = TimeGrid::uniform(90, 3.0 * 365.0);
  HarmonicSpec spec;  // defaults: H = 2, trend, contrasts, informative slope prior
  const DesignBundle b = build_design(grid, spec);
  Eigen::VectorXd y(grid.size());
  for (int i = 0; i < y.size(); ++i)
    y[i] = 0.3 * std::sin(b.omega * grid.design_time(i)) +
           (grid.time(i) > 0.5 ? 0.9 : 0.0) + 0.25 * rng.normal();
  // a couple of outliers so the robust weights matter
  y[20] += 4.0;
  y[55] -= 3.0;

  EmOptions opts;
  opts.tol = 1e-13;
  opts.max_iter = 3000;
  const int k = 2;
  const FitResult fit = em_fit(y, grid, b, k, RobustConfig{}, opts);
  REQUIRE(fit.converged);

  const int np = b.p * k, nf = b.p_phi;
  auto objective = [&](const Eigen::VectorXd& x) {
    Eigen::MatrixXd theta(b.p, k);
    for (int j = 0; j < k; ++j) theta.col(j) = x.segment(j * b.p, b.p);
    const Eigen::VectorXd phi = x.segment(np, nf);
    return helpers::em_objective(y, b, fit.q_means, theta, phi, x[np + nf]);
  };
  Eigen::VectorXd x(np + nf + 1);
  for (int j = 0; j < k; ++j) x.segment(j * b.p, b.p) = fit.params.theta.col(j);
  x.segment(np, nf) = fit.params.phi;
  x[np + nf] = fit.params.sigma2;
  REQUIRE(helpers::relative_gradient(objective, x) < 1e-5);
}

TEST_CASE("penalized objective trace is monotone within slack") {
  Rng rng(555);
  for (int rep = 0; rep < 8; ++rep) {
    const int n_obs = 40 + static_cast<int>(rng.uniform_int(40));
    std::vector<double> raw{0.0};
    for (int i = 1; i < n_obs; ++i) raw.push_back(raw.back() + 1.0 + 5.0 * rng.uniform());
    const TimeGrid grid = TimeGrid::from_raw(raw);
    const DesignBundle b = intercept_design(n_obs);
    Eigen::VectorXd y(n_obs);
    const int cut = n_obs / 3 + static_cast<int>(rng.uniform_int(n_obs / 3));
    for (int i = 0; i < n_obs; ++i)
      y[i] = (i >= cut ? 1.0 : 0.0) + 0.4 * rng.student_t(3.0);

    const int k = 1 + static_cast<int>(rng.uniform_int(4));
    const RobustConfig cfg{rep % 2 ? LikelihoodMode::robust_t : LikelihoodMode::gaussian,
                           3.0};
    const FitResult fit = em_fit(y, grid, b, k, cfg);
    REQUIRE(fit.penalized_trace.size() == fit.trace.size());
    /* the raw likelihood trace may dip because the variance update targets
       the posterior mode; the penalized objective is what each M-step
       maximizes and therefore must never decrease beyond rounding */
    for (std::size_t s = 1; s < fit.penalized_trace.size(); ++s)
      REQUIRE(fit.penalized_trace[s] >=
              fit.penalized_trace[s - 1] -
                  1e-8 * (1.0 + std::fabs(fit.penalized_trace[s - 1])));
    REQUIRE(fit.q_means.minCoeff() >= 0.0);
  }
}

TEST_CASE("two-segment step is recovered") {
  Rng rng(777);
  const TimeGrid grid = TimeGrid::uniform(80, 365.0);
  const DesignBundle b = intercept_design(80);
  const Eigen::VectorXd y = step_series(grid, 2.0, 40, 0.2, rng);
  const FitResult fit = em_fit(y, grid, b, 2);
  REQUIRE(fit.converged);
  REQUIRE_THAT(fit.params.theta(0, 0), Catch::Matchers::WithinAbs(0.0, 0.15));
  REQUIRE_THAT(fit.params.theta(0, 1), Catch::Matchers::WithinAbs(2.0, 0.15));
  // posterior switch happens near the true index
  int flip = -1;
  for (int i = 0; i < 80; ++i)
    if (fit.fb.marginals(i, 1) > 0.5) {
      flip = i;
      break;
    }
  REQUIRE(flip >= 37);
  REQUIRE(flip <= 43);
}

TEST_CASE("gaussian mode is the large-nu limit of the robust mode") {
  Rng rng(808);
  const TimeGrid grid = TimeGrid::uniform(50, 365.0);
  const DesignBundle b = intercept_design(50);
  const Eigen::VectorXd y = step_series(grid, 1.5, 25, 0.3, rng);
  EmOptions opts;
  opts.tol = 1e-12;
  const FitResult gauss =
      em_fit(y, grid, b, 2, RobustConfig{LikelihoodMode::gaussian, 3.0}, opts);
  const FitResult heavy =
      em_fit(y, grid, b, 2, RobustConfig{LikelihoodMode::robust_t, 1e7}, opts);
  REQUIRE_THAT((gauss.params.theta - heavy.params.theta).cwiseAbs().maxCoeff(),
               Catch::Matchers::WithinAbs(0.0, 1e-4));
  REQUIRE_THAT(gauss.params.sigma2 - heavy.params.sigma2,
               Catch::Matchers::WithinAbs(0.0, 1e-4));
}

TEST_CASE("repeat runs are bit identical") {
  Rng rng(101);
  const TimeGrid grid = TimeGrid::uniform(40, 365.0);
  const DesignBundle b = intercept_design(40);
  const Eigen::VectorXd y = step_series(grid, 1.0, 20, 0.3, rng);
  const FitResult a = em_fit(y, grid, b, 3);
  const FitResult c = em_fit(y, grid, b, 3);
  REQUIRE(a.params.theta == c.params.theta);
  REQUIRE(a.params.sigma2 == c.params.sigma2);
  REQUIRE(a.log_marginal_lik == c.log_marginal_lik);
  REQUIRE(a.n_iter == c.n_iter);
}

TEST_CASE("bad inputs are rejected") {
  const TimeGrid grid = TimeGrid::uniform(6, 365.0);
  const DesignBundle b = intercept_design(6);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(6);
  CHECK_THROWS_AS(em_fit(y, grid, b, 0), invalid_input);
  y[3] = std::nan("");
  CHECK_THROWS_AS(em_fit(y, grid, b, 2), invalid_input);
  y[3] = 0.0;
  EmOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(em_fit(y, grid, b, 2, RobustConfig{}, bad), invalid_input);

  const TimeGrid tiny = TimeGrid::uniform(2, 10.0);
  const DesignBundle ib = intercept_design(2);
  Eigen::VectorXd ty(2);
  ty << 0.0, 1.0;
  CHECK_THROWS_AS(em_fit(ty, tiny, ib, 1), invalid_input);  // fewer than p + 2 rows
}
