#include "gds/dynamics.hpp"

#include <cmath>

#include "gds/error.hpp"

namespace gds {

AffineSystem::AffineSystem(const SpectralBasis& basis, ShiftSpectrum shift, int s)
    : basis_(&basis), shift_(std::move(shift)), horizon_(s) {
  if (s < 1) fail(ErrorCode::InvalidArgument, "horizon s must be >= 1");
  if (shift_.n() != basis_->n())
    fail(ErrorCode::InvalidArgument, "shift spectrum length does not match basis");
  if (!shift_.lambda.allFinite())
    fail(ErrorCode::InvalidArgument, "shift eigenvalues must be finite");
}

double lambda_bar(double lambda, int t) {
  if (t < 0) fail(ErrorCode::InvalidArgument, "t must be >= 0");
  if (t == 0) return 0.0;
  if (std::abs(1.0 - lambda) > 1e-8)
    return (1.0 - std::pow(lambda, t)) / (1.0 - lambda);
  // Near lambda = 1 the closed form cancels catastrophically; sum directly.
  double acc = 0.0, pow_l = 1.0;
  for (int l = 0; l < t; ++l) {
    acc += pow_l;
    pow_l *= lambda;
  }
  return acc;
}

Eigen::MatrixXd evolve(const AffineSystem& sys, const Eigen::VectorXd& x0,
                       const Eigen::VectorXd& w) {
  const int n = sys.n();
  const int s = sys.horizon();
  if (x0.size() != n || w.size() != n) fail(ErrorCode::InvalidArgument, "dimension mismatch");

  const Eigen::MatrixXd& U = sys.basis().U;
  const Eigen::VectorXd x0_hat = U.transpose() * x0;
  const Eigen::VectorXd w_hat = U.transpose() * w;

  Eigen::MatrixXd traj(n, s);
  Eigen::VectorXd coeff = x0_hat;
  for (int t = 0; t < s; ++t) {
    traj.col(t) = U * coeff;
    coeff = sys.shift().lambda.cwiseProduct(coeff) + w_hat;
  }
  if (!traj.allFinite()) fail(ErrorCode::Numeric, "trajectory diverged to non-finite values");
  return traj;
}

Eigen::VectorXd apply_pi(const AffineSystem& sys, int k, const Eigen::VectorXd& w_aug) {
  const int n = sys.n();
  const int s = sys.horizon();
  if (k < 1 || k > n) fail(ErrorCode::InvalidArgument, "bandwidth k out of range");
  if (w_aug.size() != 2 * n) fail(ErrorCode::InvalidArgument, "w_aug must have length 2n");

  const Eigen::MatrixXd Uk = sys.basis().U.leftCols(k);
  const Eigen::VectorXd x0 = w_aug.head(n);
  const Eigen::VectorXd w = w_aug.tail(n);
  const Eigen::VectorXd x0_hat = Uk.transpose() * x0;
  const Eigen::VectorXd w_hat = Uk.transpose() * w;

  const double res_x0 = (x0 - Uk * x0_hat).norm();
  const double res_w = (w - Uk * w_hat).norm();
  const double scale = std::max(1.0, w_aug.norm());
  if (res_x0 > 1e-8 * scale || res_w > 1e-8 * scale)
    fail(ErrorCode::InvalidArgument, "input is not k-bandlimited (projection residual too large)");

  const Eigen::VectorXd lam = sys.shift().lambda.head(k);
  Eigen::VectorXd out(static_cast<Eigen::Index>(s) * n);
  Eigen::VectorXd lam_pow = Eigen::VectorXd::Ones(k);
  Eigen::VectorXd lam_bar = Eigen::VectorXd::Zero(k);
  for (int t = 0; t < s; ++t) {
    out.segment(static_cast<Eigen::Index>(t) * n, n) =
        Uk * (lam_pow.cwiseProduct(x0_hat) + lam_bar.cwiseProduct(w_hat));
    lam_bar += lam_pow;
    lam_pow = lam_pow.cwiseProduct(lam);
  }
  return out;
}

StabilityBounds stability_bounds(const Eigen::VectorXd& lambda, int k, int s) {
  if (s < 1) fail(ErrorCode::InvalidArgument, "horizon s must be >= 1");
  if (k < 1 || k > lambda.size()) fail(ErrorCode::InvalidArgument, "bandwidth k out of range");

  StabilityBounds bounds;
  bounds.per_mode.reserve(k);
  bool first = true;
  for (int j = 0; j < k; ++j) {
    const double lam = lambda[j];
    double a = 0.0, b = 0.0, d = 0.0;
    double pow_l = 1.0, bar = 0.0;
    for (int t = 0; t < s; ++t) {
      a += pow_l * pow_l;
      b += pow_l * bar;
      d += bar * bar;
      bar += pow_l;
      pow_l *= lam;
    }
    const double tr = a + d;
    const double det = a * d - b * b;
    const double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
    const double emax = 0.5 * (tr + disc);
    const double emin = emax > 0.0 ? det / emax : 0.0;  // stable small root
    bounds.per_mode.emplace_back(emin, emax);
    if (first) {
      bounds.c = emin;
      bounds.C = emax;
      first = false;
    } else {
      bounds.c = std::min(bounds.c, emin);
      bounds.C = std::max(bounds.C, emax);
    }
  }
  return bounds;
}

StabilityBounds stability_bounds(const AffineSystem& sys, int k) {
  return stability_bounds(sys.shift().lambda, k, sys.horizon());
}

}  // namespace gds
