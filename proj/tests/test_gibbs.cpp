#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <map>
#include <vector>

#include "bpp/forward_backward.hpp"
#include "bpp/gibbs.hpp"
#include "bpp/rng.hpp"
#include "helpers.hpp"

using namespace bpp;

namespace {

GibbsState frozen_state(const Eigen::VectorXd& y, const DesignBundle& b, int k,
                        double sigma2) {
  GibbsState st;
  st.params.theta = Eigen::MatrixXd::Zero(b.p, k);
  for (int j = 0; j < k; ++j) st.params.theta(0, j) = j;
  st.params.phi = Eigen::VectorXd(0);
  st.params.sigma2 = sigma2;
  st.q = Eigen::VectorXd::Ones(y.size());
  st.path.assign(y.size(), 1);
  return st;
}

}  // namespace

TEST_CASE("coefficient draw matches the conjugate Gaussian") {
  Rng data_rng(11);
  const int n = 60;
  const TimeGrid grid = TimeGrid::uniform(n);
  const DesignBundle b = intercept_design(n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = 1.5 + 0.5 * data_rng.normal();

  GibbsState st = frozen_state(y, b, 1, 0.25);
  Rng rng(22);

  SECTION("mean and variance against the closed form") {
    const double ols = y.mean();  // intercept-only least squares
    const double var = st.params.sigma2 / n;
    const int draws = 100000;
    double s1 = 0.0, s2 = 0.0;
    for (int d = 0; d < draws; ++d) {
      sample_theta_phi(&st, y, b, rng);
      const double x = st.params.theta(0, 0);
      s1 += x;
      s2 += x * x;
    }
    const double mean = s1 / draws;
    const double v = s2 / draws - mean * mean;
    REQUIRE_THAT(mean, Catch::Matchers::WithinAbs(ols, 4.0 * std::sqrt(var / draws)));
    REQUIRE_THAT(v, Catch::Matchers::WithinRel(var, 0.05));
  }

  SECTION("overwhelming prior precision pins the draw at zero") {
    DesignBundle strong = b;
    strong.lambda_theta = Eigen::VectorXd::Constant(1, 1e12);
    st.params.sigma2 = 1e-6;
    for (int d = 0; d < 50; ++d) {
      sample_theta_phi(&st, y, strong, rng);
      REQUIRE(std::fabs(st.params.theta(0, 0)) < 1e-4);
    }
  }
}

TEST_CASE("variance draw matches scaled inverse chi-squared moments") {
  Rng data_rng(33);
  const int n = 40;
  const DesignBundle b = intercept_design(n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = 2.0 + 0.3 * data_rng.normal();

  GibbsState st = frozen_state(y, b, 2, 1.0);
  for (int i = n / 2; i < n; ++i) st.path[i] = 2;

  const Eigen::MatrixXd mu = segment_means(y, b, st.params);
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - mu(i, st.path[i] - 1);
    scale += r * r;
  }
  const double nu0 = n + b.p * 2;
  const double expect = scale / (nu0 - 2.0);
  const double sd =
      std::sqrt(2.0 * scale * scale / ((nu0 - 2.0) * (nu0 - 2.0) * (nu0 - 4.0)));

  Rng rng(44);
  const int draws = 100000;
  double acc = 0.0;
  for (int d = 0; d < draws; ++d) {
    st.params.sigma2 = 1.0;
    sample_sigma2(&st, y, b, rng);
    REQUIRE(st.params.sigma2 > 0.0);
    acc += st.params.sigma2;
  }
  REQUIRE_THAT(acc / draws,
               Catch::Matchers::WithinAbs(expect, 3.0 * sd / std::sqrt(1.0 * draws)));
}

TEST_CASE("variance draw floors the degenerate zero-residual corner") {
  const int n = 10;
  const DesignBundle b = intercept_design(n);
  const Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  GibbsState st = frozen_state(y, b, 1, 1.0);  // theta = 0 fits exactly
  Rng rng(55);
  sample_sigma2(&st, y, b, rng);
  REQUIRE(st.params.sigma2 == 1e-12);
}

TEST_CASE("latent scale draw matches gamma moments") {
  const int n = 30;
  const DesignBundle b = intercept_design(n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  y[7] = 2.0;  // one residual of 2 under theta = 0
  GibbsState st = frozen_state(y, b, 1, 1.0);
  const double nu = 3.0;

  Rng rng(66);
  const int draws = 100000;
  double zero_acc = 0.0, out_acc = 0.0;
  for (int d = 0; d < draws; ++d) {
    sample_q(&st, y, b, nu, rng);
    REQUIRE(st.q.minCoeff() > 0.0);
    zero_acc += st.q[0];
    out_acc += st.q[7];
  }
  // zero residual: Gamma((nu+1)/2, nu/2), mean (nu+1)/nu, var mean/(nu/2)
  const double m0 = (nu + 1.0) / nu;
  const double sd0 = std::sqrt(m0 / (0.5 * nu));
  REQUIRE_THAT(zero_acc / draws,
               Catch::Matchers::WithinAbs(m0, 3.0 * sd0 / std::sqrt(1.0 * draws)));
  // residual 2: rate nu/2 + 2, mean 2/3.5
  const double m7 = 0.5 * (nu + 1.0) / (0.5 * nu + 2.0);
  const double sd7 = std::sqrt(m7 / (0.5 * nu + 2.0));
  REQUIRE_THAT(out_acc / draws,
               Catch::Matchers::WithinAbs(m7, 3.0 * sd7 / std::sqrt(1.0 * draws)));
}

TEST_CASE("path draw reproduces exact conditional probabilities") {
  Rng data_rng(77);
  const int n = 6, k = 3;
  std::vector<double> raw{0.0};
  for (int i = 1; i < n; ++i) raw.push_back(raw.back() + 0.5 + data_rng.uniform());
  const TimeGrid grid = TimeGrid::from_raw(raw);
  const DesignBundle b = intercept_design(n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = 0.8 * (i >= 3) + 0.6 * data_rng.normal();

  GibbsState st = frozen_state(y, b, k, 0.5);
  st.params.theta(0, 0) = 0.0;
  st.params.theta(0, 1) = 0.8;
  st.params.theta(0, 2) = 1.4;
  for (int i = 0; i < n; ++i) st.q[i] = 0.5 + 0.25 * i;

  // exact conditional p(z | y, theta, sigma2, q) by path enumeration
  const Eigen::MatrixXd mu = segment_means(y, b, st.params);
  auto path_logprob = [&](const StatePath& path) {
    double lp = log_bpp_prior(path, grid, k);
    for (int i = 0; i < n; ++i)
      lp += gaussian_logpdf(y[i], mu(i, path[i] - 1), st.params.sigma2 / st.q[i]);
    return lp;
  };
  const auto paths = helpers::enumerate_paths(n, k);
  std::vector<double> lps;
  for (const auto& path : paths) lps.push_back(path_logprob(path));
  const double norm = logsumexp(lps);

  std::map<StatePath, int> counts;
  const auto tensor = log_transition_tensor(grid, k);
  Rng rng(88);
  const int draws = 100000;
  Eigen::MatrixXd occupancy = Eigen::MatrixXd::Zero(n, k);
  for (int d = 0; d < draws; ++d) {
    sample_path(&st, y, b, tensor, rng);
    ++counts[st.path];
    for (int i = 0; i < n; ++i) occupancy(i, st.path[i] - 1) += 1.0;
  }

  for (std::size_t c = 0; c < paths.size(); ++c) {
    const double p = std::exp(lps[c] - norm);
    if (p < 1e-4) continue;
    const double freq =
        counts.count(paths[c]) ? counts[paths[c]] / static_cast<double>(draws) : 0.0;
    const double se = std::sqrt(p * (1.0 - p) / draws);
    REQUIRE_THAT(freq, Catch::Matchers::WithinAbs(p, 3.5 * se + 1e-12));
  }

  // per-time marginals against the forward-backward smoother
  Eigen::MatrixXd loglik(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j)
      loglik(i, j) = gaussian_logpdf(y[i], mu(i, j), st.params.sigma2 / st.q[i]);
  const FBResult fb = forward_backward(k, grid, loglik);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) {
      const double p = fb.marginals(i, j);
      const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / draws);
      REQUIRE_THAT(occupancy(i, j) / draws,
                   Catch::Matchers::WithinAbs(p, 3.5 * se + 1e-12));
    }
}

TEST_CASE("path draw with one segment is constant") {
  const int n = 12;
  const TimeGrid grid = TimeGrid::uniform(n);
  const DesignBundle b = intercept_design(n);
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
  GibbsState st = frozen_state(y, b, 1, 1.0);
  const auto tensor = log_transition_tensor(grid, 1);
  Rng rng(99);
  for (int d = 0; d < 20; ++d) {
    sample_path(&st, y, b, tensor, rng);
    REQUIRE(st.path == StatePath(n, 1));
  }
}

TEST_CASE("gibbs run: determinism, shape, and validity") {
  Rng data_rng(123);
  const int n = 50;
  std::vector<double> raw{0.0};
  for (int i = 1; i < n; ++i) raw.push_back(raw.back() + 1.0 + data_rng.uniform());
  const TimeGrid grid = TimeGrid::from_raw(raw);
  const DesignBundle b = intercept_design(n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = (i >= 25 ? 1.0 : 0.0) + 0.3 * data_rng.student_t(3.0);

  GibbsOptions opts;
  opts.iters = 400;
  opts.burnin = 100;
  opts.thin = 3;
  opts.seed = 7;
  const GibbsTrace t1 = gibbs_run(y, grid, b, 2, {}, opts);
  REQUIRE(static_cast<int>(t1.draws.size()) == (opts.iters - opts.burnin) / opts.thin);
  REQUIRE(t1.log_joint.size() == t1.draws.size());

  for (const GibbsState& st : t1.draws) {
    REQUIRE(st.params.sigma2 > 0.0);
    REQUIRE(st.q.minCoeff() > 0.0);
    REQUIRE(st.path.front() == 1);
    for (std::size_t i = 1; i < st.path.size(); ++i) {
      REQUIRE(st.path[i] >= st.path[i - 1]);
      REQUIRE(st.path[i] <= 2);
    }
  }

  const GibbsTrace t2 = gibbs_run(y, grid, b, 2, {}, opts);
  for (std::size_t d = 0; d < t1.draws.size(); ++d) {
    REQUIRE(t1.draws[d].params.theta == t2.draws[d].params.theta);
    REQUIRE(t1.draws[d].params.sigma2 == t2.draws[d].params.sigma2);
    REQUIRE(t1.draws[d].path == t2.draws[d].path);
    REQUIRE(t1.log_joint[d] == t2.log_joint[d]);
  }
}

TEST_CASE("gibbs run: conjugate k = 1 posterior mean recovers least squares") {
  Rng data_rng(321);
  const int n = 80;
  const TimeGrid grid = TimeGrid::uniform(n);
  const DesignBundle b = intercept_design(n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = 0.7 + 0.4 * data_rng.normal();

  GibbsOptions opts;
  opts.iters = 3000;
  opts.burnin = 500;
  opts.thin = 1;
  opts.seed = 31;
  const GibbsTrace trace =
      gibbs_run(y, grid, b, 1, {LikelihoodMode::gaussian, 3.0}, opts);
  double acc = 0.0;
  for (const GibbsState& st : trace.draws) acc += st.params.theta(0, 0);
  const double post_mean = acc / trace.draws.size();
  // posterior of theta centers on the sample mean with spread sigma2 / n;
  // allow generous Monte-Carlo slack for autocorrelation
  REQUIRE_THAT(post_mean,
               Catch::Matchers::WithinAbs(y.mean(), 6.0 * 0.4 / std::sqrt(1.0 * n)));
}

TEST_CASE("gibbs run: bad options are rejected") {
  const int n = 10;
  const TimeGrid grid = TimeGrid::uniform(n);
  const DesignBundle b = intercept_design(n);
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
  GibbsOptions opts;
  opts.iters = 10;
  opts.burnin = 10;
  CHECK_THROWS_AS(gibbs_run(y, grid, b, 1, {}, opts), invalid_input);
  opts.burnin = 2;
  opts.thin = 0;
  CHECK_THROWS_AS(gibbs_run(y, grid, b, 1, {}, opts), invalid_input);
  CHECK_THROWS_AS(gibbs_run(y, grid, b, 0, {}, {}), invalid_input);
}
