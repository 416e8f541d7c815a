#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "gds/rng.hpp"

namespace gds {

/// Orthonormal eigenbasis of a symmetric operator, eigenvalues ascending.
/// Column signs follow a fixed convention (largest-magnitude entry positive)
/// so repeated runs produce identical bases.
struct SpectralBasis {
  Eigen::MatrixXd U;
  Eigen::VectorXd theta;

  int n() const { return static_cast<int>(theta.size()); }
};

/// Eigenvalues of a shift operator sharing the basis eigenspace. When built
/// from exp(-alpha * L) with alpha > 0 the entries lie in (0, 1] and are
/// non-increasing along the ascending-theta ordering.
struct ShiftSpectrum {
  Eigen::VectorXd lambda;
  double alpha = std::numeric_limits<double>::quiet_NaN();

  int n() const { return static_cast<int>(lambda.size()); }
};

/// Dense symmetric eigendecomposition; input must be symmetric within 1e-10.
SpectralBasis eigendecompose(const Eigen::MatrixXd& sym);
SpectralBasis eigendecompose(const Eigen::SparseMatrix<double>& sym);

/// Forward transform onto the first k modes.
Eigen::VectorXd gft(const SpectralBasis& basis, int k, const Eigen::VectorXd& x);

/// Inverse transform from k coefficients.
Eigen::VectorXd igft(const SpectralBasis& basis, int k, const Eigen::VectorXd& xhat);

/// Draws U_k c with c i.i.d. standard normal.
Eigen::VectorXd random_bandlimited(const SpectralBasis& basis, int k, Rng& rng);

/// Smallest k whose leading modes capture `fraction` of the total energy of
/// the given signals (columns of `signals`).
int bandwidth_for_energy(const SpectralBasis& basis, const Eigen::MatrixXd& signals,
                         double fraction);

/// Shift spectrum of exp(-alpha * L): lambda_j = exp(-alpha * theta_j).
ShiftSpectrum shift_from_heat(const SpectralBasis& basis, double alpha);

/// Dense U diag(lambda) U^T.
Eigen::MatrixXd materialize_operator(const SpectralBasis& basis, const ShiftSpectrum& shift);

/// Binary cache for a computed basis, keyed by the source graph's hash.
void save_basis(const SpectralBasis& basis, std::uint64_t graph_hash, const std::string& path);
std::optional<SpectralBasis> load_basis(const std::string& path, std::uint64_t expected_hash);

}  // namespace gds
