#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "bpp/errors.hpp"
#include "bpp/time_grid.hpp"

namespace bpp {

struct HarmonicSpec {
  int H = 2;
  bool trend = true;
  bool contrasts = true;
  double beta_precision = 5.0;  // prior precision of the trend slope
  double psi = 1.0;             // contrast prior scale
  double lambda = 1.0;          // contrast prior decay over harmonic order
};

/* Covariance of the first H-1 contrast coefficients of one family after
   conditioning the independent N(0, psi e^(lambda (1-h))) prior on the
   continuity constraint that ties coefficient H to the others:
   entry (a,b) = delta_ab phi_a - phi_a phi_b / (sum_h phi_h). */
inline Eigen::MatrixXd contrast_prior_covariance(int H, double psi, double lambda) {
  if (H < 2) throw invalid_input("contrast_prior_covariance: need H >= 2");
  if (!(psi > 0.0)) throw invalid_input("contrast_prior_covariance: psi must be > 0");
  if (lambda < 0.0) throw invalid_input("contrast_prior_covariance: lambda must be >= 0");
  Eigen::VectorXd phi(H);
  for (int h = 1; h <= H; ++h) phi[h - 1] = psi * std::exp(lambda * (1.0 - h));
  const double s = phi.sum();
  Eigen::MatrixXd cov(H - 1, H - 1);
  for (int a = 0; a < H - 1; ++a)
    for (int b = 0; b < H - 1; ++b)
      cov(a, b) = (a == b ? phi[a] : 0.0) - phi[a] * phi[b] / s;
  return cov;
}

/* Season-trend design.  X carries intercept, optional linear trend in design
   time, and H sin/cos pairs at multiples of the annual frequency
   omega = 2 pi span / 365 (phase is anchored at the first observation, so one
   365-day block advances the phase by exactly 2 pi).  W carries per-year
   harmonic contrasts in a reduced parameterization whose basis functions and
   their time derivatives both vanish at every 365-day block boundary:
     sin family, h < H: sin(h w t) - (h/H) sin(H w t)
     cos family, h < H: cos(h w t) - cos(H w t)
   so any coefficient draw keeps the mean and its slope continuous across
   years.  Expanding back to H coefficients per family per year satisfies
   sum_h h gamma_h = 0 and sum_h delta_h = 0. */
struct DesignBundle {
  Eigen::MatrixXd X, W;
  int p = 0, p_phi = 0, H = 0, J = 0;
  bool trend = false, contrasts = false;
  std::vector<int> year;
  Eigen::VectorXd lambda_theta;   // diagonal prior precision on theta
  Eigen::MatrixXd lambda_phi;     // prior precision on reduced contrasts
  double log_det_prior_precision = 0.0;  // over the positive entries only
  double omega = 0.0, span_days = 0.0;

  int year_at(double design_time) const {
    return static_cast<int>(std::floor((design_time * span_days + 1e-9) / 365.0));
  }

  Eigen::VectorXd x_row_at(double d) const {
    Eigen::VectorXd x(p);
    int c = 0;
    x[c++] = 1.0;
    if (trend) x[c++] = d;
    for (int h = 1; h <= H; ++h) {
      x[c++] = std::sin(h * omega * d);
      x[c++] = std::cos(h * omega * d);
    }
    return x;
  }

  Eigen::VectorXd dx_row_at(double d) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
    int c = 1;
    if (trend) x[c++] = 1.0;
    for (int h = 1; h <= H; ++h) {
      x[c++] = h * omega * std::cos(h * omega * d);
      x[c++] = -h * omega * std::sin(h * omega * d);
    }
    return x;
  }

  /* The contrast basis is 365-day periodic, so its phase is taken relative to
     the row's own block start; that keeps the trig arguments small and makes
     the basis vanish exactly at block boundaries instead of to within
     large-argument rounding. */
  double local_phase(double d, int yr) const {
    return 2.0 * M_PI * (d * span_days - 365.0 * yr) / 365.0;
  }

  Eigen::VectorXd w_row_at(double d, int yr) const {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(p_phi);
    if (!contrasts || yr < 0 || yr >= J) return w;
    const int base = yr * 2 * (H - 1);
    const double ph = local_phase(d, yr);
    const double sH = std::sin(H * ph), cH = std::cos(H * ph);
    for (int h = 1; h < H; ++h) {
      w[base + h - 1] = std::sin(h * ph) - (static_cast<double>(h) / H) * sH;
      w[base + (H - 1) + h - 1] = std::cos(h * ph) - cH;
    }
    return w;
  }

  Eigen::VectorXd dw_row_at(double d, int yr) const {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(p_phi);
    if (!contrasts || yr < 0 || yr >= J) return w;
    const int base = yr * 2 * (H - 1);
    const double ph = local_phase(d, yr);
    const double cH = std::cos(H * ph), sH = std::sin(H * ph);
    for (int h = 1; h < H; ++h) {
      w[base + h - 1] = h * omega * (std::cos(h * ph) - cH);
      w[base + (H - 1) + h - 1] = -h * omega * std::sin(h * ph) + H * omega * sH;
    }
    return w;
  }
};

inline DesignBundle build_design(const TimeGrid& grid, const HarmonicSpec& spec) {
  if (spec.H < 1) throw invalid_input("build_design: need H >= 1");
  if (spec.contrasts && spec.H < 2)
    throw invalid_input("build_design: contrasts need H >= 2");
  if (spec.beta_precision < 0.0)
    throw invalid_input("build_design: beta_precision must be >= 0");
  if (grid.size() < 2) throw invalid_input("build_design: need at least 2 observations");

  DesignBundle b;
  b.H = spec.H;
  b.trend = spec.trend;
  b.contrasts = spec.contrasts;
  b.span_days = grid.raw_span_days();
  b.omega = 2.0 * M_PI * b.span_days / 365.0;
  b.p = 1 + (spec.trend ? 1 : 0) + 2 * spec.H;

  const int n_obs = static_cast<int>(grid.size());
  b.year.resize(n_obs);
  for (int i = 0; i < n_obs; ++i) b.year[i] = b.year_at(grid.design_time(i));
  b.J = 1;
  for (int y : b.year) b.J = std::max(b.J, y + 1);

  b.X.resize(n_obs, b.p);
  for (int i = 0; i < n_obs; ++i) b.X.row(i) = b.x_row_at(grid.design_time(i));

  b.lambda_theta = Eigen::VectorXd::Zero(b.p);
  b.log_det_prior_precision = 0.0;
  if (spec.trend) {
    b.lambda_theta[1] = spec.beta_precision;
    if (spec.beta_precision > 0.0)
      b.log_det_prior_precision = std::log(spec.beta_precision);
  }

  if (spec.contrasts) {
    b.p_phi = 2 * (spec.H - 1) * b.J;
    b.W.resize(n_obs, b.p_phi);
    for (int i = 0; i < n_obs; ++i)
      b.W.row(i) = b.w_row_at(grid.design_time(i), b.year[i]);
    const Eigen::MatrixXd cov = contrast_prior_covariance(spec.H, spec.psi, spec.lambda);
    const Eigen::MatrixXd prec = cov.llt().solve(
        Eigen::MatrixXd::Identity(spec.H - 1, spec.H - 1));
    b.lambda_phi = Eigen::MatrixXd::Zero(b.p_phi, b.p_phi);
    for (int block = 0; block < 2 * b.J; ++block)
      b.lambda_phi.block(block * (spec.H - 1), block * (spec.H - 1), spec.H - 1,
                         spec.H - 1) = prec;
  } else {
    b.p_phi = 0;
    b.W.resize(n_obs, 0);
    b.lambda_phi.resize(0, 0);
  }
  return b;
}

/* Plain intercept-per-segment design with flat priors. */
inline DesignBundle intercept_design(int n_obs) {
  if (n_obs < 1) throw invalid_input("intercept_design: need at least 1 observation");
  DesignBundle b;
  b.p = 1;
  b.X = Eigen::MatrixXd::Ones(n_obs, 1);
  b.W.resize(n_obs, 0);
  b.year.assign(n_obs, 0);
  b.J = 1;
  b.lambda_theta = Eigen::VectorXd::Zero(1);
  b.lambda_phi.resize(0, 0);
  return b;
}

/* Full H-coefficient expansion of one reduced contrast family.  The sin
   family absorbs the derivative constraint (top coefficient -sum h phi_h / H),
   the cos family the level constraint (-sum phi_h). */
inline Eigen::VectorXd expand_contrast_family(const Eigen::VectorXd& reduced, int H,
                                              bool sin_family) {
  if (reduced.size() != H - 1)
    throw invalid_input("expand_contrast_family: reduced size must be H-1");
  Eigen::VectorXd full(H);
  double top = 0.0;
  for (int h = 1; h < H; ++h) {
    full[h - 1] = reduced[h - 1];
    top += sin_family ? h * reduced[h - 1] : reduced[h - 1];
  }
  full[H - 1] = sin_family ? -top / H : -top;
  return full;
}

}  // namespace bpp
