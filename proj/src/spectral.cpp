#include "gds/spectral.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstring>
#include <fstream>

#include "gds/error.hpp"

namespace gds {

namespace {

constexpr std::uint64_t kBasisMagic = 0x5342444742535053ULL;

void fix_column_signs(Eigen::MatrixXd& U) {
  for (int j = 0; j < U.cols(); ++j) {
    int idx = 0;
    U.col(j).cwiseAbs().maxCoeff(&idx);
    if (U(idx, j) < 0.0) U.col(j) = -U.col(j);
  }
}

void check_bandwidth(const SpectralBasis& basis, int k) {
  if (k < 1 || k > basis.n())
    fail(ErrorCode::InvalidArgument,
         "bandwidth k=" + std::to_string(k) + " out of range [1," + std::to_string(basis.n()) + "]");
}

}  // namespace

SpectralBasis eigendecompose(const Eigen::MatrixXd& sym) {
  if (sym.rows() != sym.cols()) fail(ErrorCode::InvalidArgument, "matrix must be square");
  if (!sym.allFinite()) fail(ErrorCode::InvalidArgument, "matrix must be finite");
  const double asym = (sym - sym.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10)
    fail(ErrorCode::InvalidArgument, "matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (sym + sym.transpose()));
  if (solver.info() != Eigen::Success) fail(ErrorCode::Numeric, "eigensolver did not converge");

  SpectralBasis basis;
  basis.U = solver.eigenvectors();
  basis.theta = solver.eigenvalues();
  fix_column_signs(basis.U);
  return basis;
}

SpectralBasis eigendecompose(const Eigen::SparseMatrix<double>& sym) {
  return eigendecompose(Eigen::MatrixXd(sym));
}

Eigen::VectorXd gft(const SpectralBasis& basis, int k, const Eigen::VectorXd& x) {
  check_bandwidth(basis, k);
  if (x.size() != basis.n()) fail(ErrorCode::InvalidArgument, "signal length mismatch");
  return basis.U.leftCols(k).transpose() * x;
}

Eigen::VectorXd igft(const SpectralBasis& basis, int k, const Eigen::VectorXd& xhat) {
  check_bandwidth(basis, k);
  if (xhat.size() != k) fail(ErrorCode::InvalidArgument, "coefficient length mismatch");
  return basis.U.leftCols(k) * xhat;
}

Eigen::VectorXd random_bandlimited(const SpectralBasis& basis, int k, Rng& rng) {
  check_bandwidth(basis, k);
  Eigen::VectorXd coeff(k);
  for (int j = 0; j < k; ++j) coeff[j] = rng.normal();
  return basis.U.leftCols(k) * coeff;
}

int bandwidth_for_energy(const SpectralBasis& basis, const Eigen::MatrixXd& signals,
                         double fraction) {
  if (signals.cols() < 1) fail(ErrorCode::InvalidArgument, "need at least one signal");
  if (signals.rows() != basis.n()) fail(ErrorCode::InvalidArgument, "signal length mismatch");
  if (!(fraction > 0.0) || fraction > 1.0)
    fail(ErrorCode::InvalidArgument, "fraction must lie in (0, 1]");

  const Eigen::MatrixXd coeffs = basis.U.transpose() * signals;
  const Eigen::VectorXd per_mode = coeffs.array().square().rowwise().sum();
  double cumulative = 0.0;
  const double total = per_mode.sum();
  if (!(total > 0.0)) fail(ErrorCode::InvalidArgument, "signals have zero energy");
  for (int k = 1; k <= basis.n(); ++k) {
    cumulative += per_mode[k - 1];
    if (cumulative >= fraction * total) return k;
  }
  return basis.n();
}

ShiftSpectrum shift_from_heat(const SpectralBasis& basis, double alpha) {
  if (!std::isfinite(alpha)) fail(ErrorCode::InvalidArgument, "alpha must be finite");
  ShiftSpectrum shift;
  shift.alpha = alpha;
  shift.lambda = (-alpha * basis.theta.array()).exp();
  return shift;
}

Eigen::MatrixXd materialize_operator(const SpectralBasis& basis, const ShiftSpectrum& shift) {
  if (shift.n() != basis.n()) fail(ErrorCode::InvalidArgument, "spectrum size mismatch");
  return basis.U * shift.lambda.asDiagonal() * basis.U.transpose();
}

void save_basis(const SpectralBasis& basis, std::uint64_t graph_hash, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write basis cache: " + path);
  const std::uint64_t n = static_cast<std::uint64_t>(basis.n());
  out.write(reinterpret_cast<const char*>(&kBasisMagic), sizeof(kBasisMagic));
  out.write(reinterpret_cast<const char*>(&graph_hash), sizeof(graph_hash));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  // U row-major, then theta.
  for (int i = 0; i < basis.n(); ++i)
    for (int j = 0; j < basis.n(); ++j) {
      const double v = basis.U(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  out.write(reinterpret_cast<const char*>(basis.theta.data()),
            static_cast<std::streamsize>(sizeof(double) * n));
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

std::optional<SpectralBasis> load_basis(const std::string& path, std::uint64_t expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::uint64_t magic = 0, hash = 0, n = 0;
  in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
  in.read(reinterpret_cast<char*>(&hash), sizeof(hash));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in || magic != kBasisMagic || hash != expected_hash || n == 0 || n > (1u << 20))
    return std::nullopt;
  SpectralBasis basis;
  basis.U.resize(n, n);
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < n; ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      basis.U(static_cast<int>(i), static_cast<int>(j)) = v;
    }
  basis.theta.resize(n);
  in.read(reinterpret_cast<char*>(basis.theta.data()), static_cast<std::streamsize>(sizeof(double) * n));
  if (!in) return std::nullopt;
  return basis;
}

}  // namespace gds
