#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "gds/spectral.hpp"

namespace gds {

/// Affine evolution x_{t+1} = A x_t + w observed over t = 0..s-1, with the
/// shift A given spectrally on a shared basis.
struct AffineSystem {
  AffineSystem(const SpectralBasis& basis, ShiftSpectrum shift, int s);

  const SpectralBasis& basis() const { return *basis_; }
  const ShiftSpectrum& shift() const { return shift_; }
  int horizon() const { return horizon_; }
  int n() const { return basis_->n(); }

 private:
  const SpectralBasis* basis_;
  ShiftSpectrum shift_;
  int horizon_;
};

/// Geometric partial sum sum_{l=0}^{t-1} lambda^l; 0 for t = 0. Uses the
/// closed form away from lambda = 1 and direct summation near it.
double lambda_bar(double lambda, int t);

/// Trajectory [x_0 .. x_{s-1}] as columns, computed in the spectral domain.
Eigen::MatrixXd evolve(const AffineSystem& sys, const Eigen::VectorXd& x0,
                       const Eigen::VectorXd& w);

/// Stacked-trajectory embedding of w_aug = [x0; w] (both halves must be
/// k-bandlimited, projection residual <= 1e-8): returns the length-sn stack
/// of U_k [Lambda_k^t  LambdaBar_k^t] [U_k^T x0; U_k^T w].
Eigen::VectorXd apply_pi(const AffineSystem& sys, int k, const Eigen::VectorXd& w_aug);

/// Frame-type bounds of the embedding on k-bandlimited inputs: extreme
/// eigenvalues, over modes j <= k, of the per-mode 2x2 blocks
///   [ sum_t lambda^{2t}        sum_t lambda^t lbar(t) ]
///   [ sum_t lambda^t lbar(t)   sum_t lbar(t)^2        ].
struct StabilityBounds {
  double c = 0.0;
  double C = 0.0;
  std::vector<std::pair<double, double>> per_mode;  // (min, max) eigenvalue per mode
};

StabilityBounds stability_bounds(const Eigen::VectorXd& lambda, int k, int s);
StabilityBounds stability_bounds(const AffineSystem& sys, int k);

}  // namespace gds
