#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "gds/sampling.hpp"

namespace gds {

/// Nonnegative, non-decreasing polynomial penalty g evaluated on Laplacian
/// spectra; coefficients in ascending degree.
struct RegularizerPoly {
  Eigen::VectorXd coeffs;

  static RegularizerPoly monomial(int degree);

  double operator()(double theta) const;
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  std::string describe() const;

  /// Checks nonnegativity and monotonicity on [0, theta_max].
  void validate(double theta_max) const;
};

struct SolverOptions {
  double tol = 1e-10;   // relative residual target
  int max_iters = -1;   // < 0 selects 10 * n
  bool strict_deterministic = false;
};

struct RecoveryDiagnostics {
  double c = std::numeric_limits<double>::quiet_NaN();
  double C = std::numeric_limits<double>::quiet_NaN();
  double R = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  std::string g_desc;
  int iterations = 0;
  bool converged = true;
  bool rank_deficient = false;
  int rank = -1;
  double achieved_residual = std::numeric_limits<double>::quiet_NaN();
};

struct RecoveryResult {
  Eigen::VectorXd w_aug;   // [x0*; w*], length 2n
  Eigen::VectorXd v_star;  // reduced coefficients (2k) or full candidate (2n)
  double residual = 0.0;   // ||W P (S pi(w*) - z)||
  RecoveryDiagnostics diagnostics;

  Eigen::VectorXd x0() const { return w_aug.head(w_aug.size() / 2); }
  Eigen::VectorXd w() const { return w_aug.tail(w_aug.size() / 2); }
  std::string to_json() const;
};

/// Condensed design matrix of the weighted sampled embedding on the
/// k-bandlimited coefficient space: row (t, j) reads node omega_{j,t} through
/// U_k [Lambda_k^t  LambdaBar_k^t] with the plan's row scaling.
Eigen::MatrixXd assemble_design_matrix(const SpectralBasis& basis, const ShiftSpectrum& shift,
                                       int k, const SamplingPlan& plan, const SampleSet& set);

/// Least squares over the k-bandlimited subspace, solved by a rank-revealing
/// orthogonal factorization of the design matrix. On rank deficiency the
/// minimum-norm solution is returned with diagnostics.rank_deficient set.
RecoveryResult recover_known_basis(const Measurements& meas, const SampleSet& set,
                                   const SamplingPlan& plan, const AffineSystem& sys, int k);

using LinOp = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Basis-free regularized least squares: solves
///   (M^T M + gamma g(Ltilde)) v = M^T (W P z),   M = W P S pi,
/// with pi applied by running the affine recurrence on the candidate [x0; w]
/// and g(Ltilde) applied blockwise by Horner evaluation in L. `apply_shift`
/// must be the (symmetric) shift operator as a matrix-vector product.
RecoveryResult recover_regularized(const Measurements& meas, const SampleSet& set,
                                   const SamplingPlan& plan, const LinOp& apply_shift,
                                   const Eigen::SparseMatrix<double>& laplacian,
                                   const RegularizerPoly& g, double gamma, int s,
                                   const SolverOptions& opts = {});

/// Conjugate-residual iteration for symmetric positive semidefinite systems;
/// residual norms are non-increasing by construction.
struct CrResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  double relative_residual = 0.0;
  std::vector<double> residual_history;
};

CrResult conjugate_residual(const LinOp& op, const Eigen::VectorXd& b, double tol, int max_iters);

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
};

struct BoundReport {
  std::vector<BoundCheck> checks;
  bool all_satisfied() const;
  std::string to_json() const;
};

/// Evaluates the recovery error guarantees against a known ground truth:
/// the least-squares noise bound for basis-aware results, and the in-band /
/// off-band split bounds (plus the noiseless total bound) for regularized
/// results when `g` is supplied.
BoundReport check_error_bounds(const RecoveryResult& result, const Eigen::VectorXd& truth,
                               const Measurements& meas, const SampleSet& set,
                               const SamplingPlan& plan, const AffineSystem& sys, int k,
                               double delta, const RegularizerPoly* g = nullptr,
                               double gamma = 0.0);

}  // namespace gds
