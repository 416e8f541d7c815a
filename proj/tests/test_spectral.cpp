#include <Eigen/Dense>
#include <filesystem>

#include "doctest.h"
#include "gds/error.hpp"
#include "gds/graph.hpp"
#include "gds/spectral.hpp"
#include "oracles.hpp"

using namespace gds;

TEST_CASE("eigendecompose: 1x1 and K2") {
  Eigen::MatrixXd one(1, 1);
  one << 3.5;
  const SpectralBasis b1 = eigendecompose(one);
  CHECK(b1.U(0, 0) == doctest::Approx(1.0));
  CHECK(b1.theta[0] == doctest::Approx(3.5));

  const Graph k2(2, {{0, 1, 1.0}});
  const SpectralBasis b2 = eigendecompose(normalized_laplacian(k2));
  CHECK(b2.theta[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(b2.theta[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("eigendecompose: rejects asymmetric input") {
  Eigen::MatrixXd bad(2, 2);
  bad << 0, 1, 0, 0;
  CHECK_THROWS_AS(eigendecompose(bad), Error);
}

TEST_CASE("eigendecompose: reconstruction and orthonormality on random graphs") {
  for (int n : {60, 150, 300}) {
    const Graph g = random_geometric_graph(n, 0.0, n);
    const Eigen::MatrixXd L = Eigen::MatrixXd(normalized_laplacian(g));
    const SpectralBasis basis = eigendecompose(L);
    const Eigen::MatrixXd recon =
        basis.U * basis.theta.asDiagonal() * basis.U.transpose();
    CHECK((recon - L).cwiseAbs().maxCoeff() < 1e-7);
    const Eigen::MatrixXd gram = basis.U.transpose() * basis.U;
    CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-8);
    for (int j = 1; j < n; ++j) CHECK(basis.theta[j] >= basis.theta[j - 1]);
  }
}

TEST_CASE("eigendecompose: deterministic across repeated runs") {
  const Graph g = random_geometric_graph(50, 0.0, 7);
  const SpectralBasis a = eigendecompose(normalized_laplacian(g));
  const SpectralBasis b = eigendecompose(normalized_laplacian(g));
  CHECK((a.U - b.U).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gft/igft: unit coefficient, Parseval, round trips") {
  Rng rng(21);
  const SpectralBasis basis = oracle::random_basis(12, rng);

  const Eigen::VectorXd first = basis.U.col(0);
  const Eigen::VectorXd hat = gft(basis, 1, first);
  CHECK(hat.size() == 1);
  CHECK(hat[0] == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::VectorXd x(12);
  for (int i = 0; i < 12; ++i) x[i] = rng.normal();
  CHECK(gft(basis, 12, x).norm() == doctest::Approx(x.norm()).epsilon(1e-12));

  for (int k : {1, 3, 7, 12}) {
    Eigen::VectorXd coeff(k);
    for (int j = 0; j < k; ++j) coeff[j] = rng.normal();
    CHECK((gft(basis, k, igft(basis, k, coeff)) - coeff).norm() < 1e-10);
    const Eigen::VectorXd band = igft(basis, k, coeff);
    CHECK((igft(basis, k, gft(basis, k, band)) - band).norm() < 1e-9 * band.norm());
  }
  CHECK_THROWS_AS(gft(basis, 0, x), Error);
  CHECK_THROWS_AS(gft(basis, 13, x), Error);
}

TEST_CASE("random_bandlimited: determinism, band residual, energy") {
  Rng rng(5);
  const SpectralBasis basis = oracle::random_basis(20, rng);

  Rng r1(77), r2(77);
  const Eigen::VectorXd a = random_bandlimited(basis, 4, r1);
  const Eigen::VectorXd b = random_bandlimited(basis, 4, r2);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXd Uk = basis.U.leftCols(4);
  CHECK((a - Uk * (Uk.transpose() * a)).norm() < 1e-10 * a.norm());

  // chi-square mean: E||x||^2 = k.
  Rng r3(123);
  double acc = 0.0;
  const int draws = 1000;
  for (int i = 0; i < draws; ++i) acc += random_bandlimited(basis, 4, r3).squaredNorm();
  CHECK(acc / draws == doctest::Approx(4.0).epsilon(0.10));
}

TEST_CASE("bandwidth_for_energy: banded input, full fraction, monotone") {
  Rng rng(31);
  const SpectralBasis basis = oracle::random_basis(15, rng);

  Eigen::MatrixXd signals(15, 2);
  signals.col(0) = random_bandlimited(basis, 3, rng);
  signals.col(1) = random_bandlimited(basis, 3, rng);
  CHECK(bandwidth_for_energy(basis, signals, 0.9) <= 3);

  Eigen::MatrixXd generic(15, 1);
  for (int i = 0; i < 15; ++i) generic(i, 0) = rng.normal();
  CHECK(bandwidth_for_energy(basis, generic, 1.0) == 15);

  int prev = 1;
  for (double fraction : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
    const int k = bandwidth_for_energy(basis, generic, fraction);
    CHECK(k >= prev);
    prev = k;
  }

  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(15, 1);
  CHECK_THROWS_AS(bandwidth_for_energy(basis, zero, 0.9), Error);
}

TEST_CASE("shift_from_heat: identity at alpha 0, leading one, monotone") {
  const Graph g = random_geometric_graph(25, 0.4, 2);
  const SpectralBasis basis = eigendecompose(normalized_laplacian(g));

  const ShiftSpectrum id = shift_from_heat(basis, 0.0);
  CHECK((id.lambda.array() - 1.0).abs().maxCoeff() == 0.0);

  const ShiftSpectrum shift = shift_from_heat(basis, 30.0);
  CHECK(shift.lambda[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(shift.lambda.minCoeff() > 0.0);
  CHECK(shift.lambda.maxCoeff() <= 1.0 + 1e-15);
  for (int j = 1; j < basis.n(); ++j) CHECK(shift.lambda[j] <= shift.lambda[j - 1] + 1e-15);

  const Eigen::MatrixXd A = materialize_operator(basis, shift);
  CHECK((A - A.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("basis cache: round trip and hash mismatch") {
  const Graph g = random_geometric_graph(18, 0.4, 3);
  const SpectralBasis basis = eigendecompose(normalized_laplacian(g));
  const std::string path =
      (std::filesystem::temp_directory_path() / "gds_basis_cache.bin").string();
  save_basis(basis, g.content_hash(), path);

  const auto loaded = load_basis(path, g.content_hash());
  REQUIRE(loaded.has_value());
  CHECK((loaded->U - basis.U).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded->theta - basis.theta).cwiseAbs().maxCoeff() == 0.0);

  CHECK(!load_basis(path, g.content_hash() + 1).has_value());
  CHECK(!load_basis("/nonexistent/gds_cache.bin", g.content_hash()).has_value());
}
