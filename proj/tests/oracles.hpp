// Independent reference computations used to pin expected values. These stay
// deliberately naive (dense assembly, brute force) so they cannot share a
// failure mode with the library's closed-form or reduced paths.
#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "gds/rng.hpp"
#include "gds/sampling.hpp"
#include "gds/spectral.hpp"

namespace oracle {

// Orthonormal basis from the QR factorization of a Gaussian matrix, with the
// library's sign convention applied for comparability.
inline gds::SpectralBasis random_basis(int n, gds::Rng& rng, double theta_max = 2.0) {
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  gds::SpectralBasis basis;
  basis.U = Q;
  basis.theta.resize(n);
  basis.theta[0] = 0.0;
  for (int j = 1; j < n; ++j) basis.theta[j] = rng.uniform01() * theta_max;
  std::sort(basis.theta.data(), basis.theta.data() + n);
  return basis;
}

// Direct summation, independent of the closed-form branch in lambda_bar.
inline double lambda_bar_sum(double lambda, int t) {
  double acc = 0.0, p = 1.0;
  for (int l = 0; l < t; ++l) {
    acc += p;
    p *= lambda;
  }
  return acc;
}

// Trajectory through powers of the augmented 2n x 2n block matrix
// [[A, I], [0, I]].
inline Eigen::MatrixXd evolve_block_power(const Eigen::MatrixXd& A, const Eigen::VectorXd& x0,
                                          const Eigen::VectorXd& w, int s) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  G.topLeftCorner(n, n) = A;
  G.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  G.bottomRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);

  Eigen::VectorXd state(2 * n);
  state.head(n) = x0;
  state.tail(n) = w;
  Eigen::MatrixXd traj(n, s);
  for (int t = 0; t < s; ++t) {
    traj.col(t) = state.head(n);
    state = G * state;
  }
  return traj;
}

// Densely assembled 2k x 2k frame matrix sum_t Y_t of the embedding.
inline Eigen::MatrixXd assemble_frame_matrix(const Eigen::VectorXd& lambda, int k, int s) {
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  for (int t = 0; t < s; ++t) {
    for (int j = 0; j < k; ++j) {
      const double lp = std::pow(lambda[j], t);
      const double lb = lambda_bar_sum(lambda[j], t);
      Y(j, j) += lp * lp;
      Y(j, k + j) += lp * lb;
      Y(k + j, j) += lp * lb;
      Y(k + j, k + j) += lb * lb;
    }
  }
  return Y;
}

// Exhaustive per-node coherence at one time step via explicit row vectors.
inline double coherence_regime2_brute(const gds::SpectralBasis& basis,
                                      const gds::ShiftSpectrum& shift, int k, int t,
                                      const Eigen::VectorXd& p) {
  const int n = basis.n();
  double nu = 0.0;
  for (int l = 0; l < n; ++l) {
    Eigen::VectorXd row(2 * k);
    for (int j = 0; j < k; ++j) {
      row[j] = basis.U(l, j) * std::pow(shift.lambda[j], t);
      row[k + j] = basis.U(l, j) * lambda_bar_sum(shift.lambda[j], t);
    }
    nu = std::max(nu, row.squaredNorm() / p[l]);
  }
  return nu;
}

// Horizon-summed coherence via the dense 2k x 2k per-node sum.
inline double coherence_regime1_dense(const gds::SpectralBasis& basis,
                                      const gds::ShiftSpectrum& shift, int k, int s,
                                      const Eigen::VectorXd& p0) {
  const int n = basis.n();
  double nu = 0.0;
  for (int l = 0; l < n; ++l) {
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(2 * k, 2 * k);
    for (int t = 0; t < s; ++t) {
      Eigen::VectorXd a(2 * k);
      for (int j = 0; j < k; ++j) {
        a[j] = std::pow(shift.lambda[j], t) * basis.U(l, j);
        a[k + j] = lambda_bar_sum(shift.lambda[j], t) * basis.U(l, j);
      }
      Z += a * a.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Z, Eigen::EigenvaluesOnly);
    nu = std::max(nu, es.eigenvalues().maxCoeff() / p0[l]);
  }
  return nu;
}

// Dense W P S matrix acting on stacked trajectories.
inline Eigen::MatrixXd dense_weighted_operator(const gds::SampleSet& set,
                                               const gds::SamplingPlan& plan) {
  const int n = plan.n();
  const int s = plan.s();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(set.total(), static_cast<Eigen::Index>(n) * s);
  Eigen::Index row = 0;
  for (int t = 0; t < s; ++t) {
    const double mt = static_cast<double>(plan.count(t));
    for (int idx : set.omega[t]) {
      M(row, static_cast<Eigen::Index>(t) * n + idx) = 1.0 / std::sqrt(mt * plan.P()(idx, t));
      ++row;
    }
  }
  return M;
}

// Uniform positive random distribution, normalized.
inline Eigen::VectorXd random_distribution(int n, gds::Rng& rng) {
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p[i] = 0.05 + rng.uniform01();
  p /= p.sum();
  return p;
}

}  // namespace oracle
