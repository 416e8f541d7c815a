#include <Eigen/Dense>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "gds/error.hpp"
#include "gds/graph.hpp"
#include "gds/rng.hpp"
#include "gds/spectral.hpp"

using namespace gds;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

void check_graph_invariants(const Graph& g) {
  const Eigen::MatrixXd W = g.dense_weights();
  CHECK((W - W.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(W.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK(W.minCoeff() >= 0.0);
  CHECK(g.degrees().minCoeff() > 0.0);
}

}  // namespace

TEST_CASE("edge list: single edge symmetrizes") {
  const std::string path = write_temp("gds_edges_single.csv", "0,1,1.0\n");
  const Graph g = load_edge_list(path);
  CHECK(g.n() == 2);
  Eigen::MatrixXd expect(2, 2);
  expect << 0, 1, 1, 0;
  CHECK((g.dense_weights() - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("edge list: degrees are row sums") {
  const std::string path = write_temp("gds_edges_deg.csv", "0,1,2.0\n1,2,3.0\n");
  const Graph g = load_edge_list(path);
  CHECK(g.degrees()[0] == doctest::Approx(2.0));
  CHECK(g.degrees()[1] == doctest::Approx(5.0));
  CHECK(g.degrees()[2] == doctest::Approx(3.0));
}

TEST_CASE("edge list: path graph P4 degree vector") {
  const std::string path = write_temp("gds_edges_p4.csv", "0,1,1\n1,2,1\n2,3,1\n");
  const Graph g = load_edge_list(path);
  const Eigen::Vector4d expect(1, 2, 2, 1);
  CHECK((g.degrees() - expect).cwiseAbs().maxCoeff() == 0.0);
  check_graph_invariants(g);
}

TEST_CASE("edge list: error paths") {
  CHECK_THROWS_AS(load_edge_list(write_temp("gds_bad_row.csv", "0,1\n")), Error);
  CHECK_THROWS_AS(load_edge_list(write_temp("gds_selfloop.csv", "1,1,1.0\n")), Error);
  CHECK_THROWS_AS(load_edge_list(write_temp("gds_conflict.csv", "0,1,1.0\n1,0,2.0\n")), Error);
  // Node 1 has no incident edge.
  CHECK_THROWS_AS(load_edge_list(write_temp("gds_isolated.csv", "0,2,1.0\n")), Error);
  CHECK_THROWS_AS(load_edge_list(write_temp("gds_negw.csv", "0,1,-1.0\n")), Error);
  // Agreeing duplicates are fine.
  CHECK_NOTHROW(load_edge_list(write_temp("gds_dup_ok.csv", "0,1,1.0\n1,0,1.0\n")));
}

TEST_CASE("edge list round trip") {
  const Graph g = random_geometric_graph(40, 0.3, 5);
  const std::string path = write_temp("gds_roundtrip.csv", "");
  save_edge_list(g, path);
  const Graph loaded = load_edge_list(path);
  CHECK(loaded.n() == g.n());
  CHECK(loaded.content_hash() == g.content_hash());
}

TEST_CASE("knn: three collinear equispaced points") {
  Eigen::MatrixX2d coords(3, 2);
  coords << 0, 0, 1, 0, 2, 0;
  const Graph g = build_knn_graph(coords, 1);
  // Edges {0-1, 1-2}, sigma = spacing, so every weight is exp(-1).
  CHECK(g.edge_count() == 2);
  const double want = std::exp(-1.0);
  CHECK(g.dense_weights()(0, 1) == doctest::Approx(want).epsilon(1e-12));
  CHECK(g.dense_weights()(1, 2) == doctest::Approx(want).epsilon(1e-12));
  CHECK(g.dense_weights()(0, 2) == 0.0);
}

TEST_CASE("knn: two points") {
  Eigen::MatrixX2d coords(2, 2);
  coords << 0, 0, 0, 3;
  const Graph g = build_knn_graph(coords, 1);
  CHECK(g.edge_count() == 1);
  CHECK(g.dense_weights()(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("knn: deterministic, ties broken by lower index") {
  Rng rng(3);
  Eigen::MatrixX2d coords(25, 2);
  for (int i = 0; i < 25; ++i) {
    coords(i, 0) = rng.uniform01();
    coords(i, 1) = rng.uniform01();
  }
  // Duplicate coordinates force a tie at the k-th neighbour.
  coords.row(7) = coords.row(3);
  const Graph a = build_knn_graph(coords, 4);
  const Graph b = build_knn_graph(coords, 4);
  CHECK(a.content_hash() == b.content_hash());
  check_graph_invariants(a);
}

TEST_CASE("knn: argument validation") {
  Eigen::MatrixX2d coords(3, 2);
  coords << 0, 0, 1, 0, 2, 0;
  CHECK_THROWS_AS(build_knn_graph(coords, 0), Error);
  CHECK_THROWS_AS(build_knn_graph(coords, 3), Error);
}

TEST_CASE("normalized diffusion: K2 and P3") {
  const Graph k2(2, {{0, 1, 1.0}});
  Eigen::MatrixXd expect(2, 2);
  expect << 0, 1, 1, 0;
  CHECK((Eigen::MatrixXd(normalized_diffusion(k2)) - expect).cwiseAbs().maxCoeff() < 1e-15);

  const Graph p3(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const Eigen::MatrixXd N = Eigen::MatrixXd(normalized_diffusion(p3));
  CHECK(N(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK((N - N.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("normalized diffusion: regular graph is W/d") {
  // 4-cycle, degree 2 everywhere.
  const Graph c4(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 3, 1.0}});
  const Eigen::MatrixXd N = Eigen::MatrixXd(normalized_diffusion(c4));
  CHECK((N - c4.dense_weights() / 2.0).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("normalized laplacian: K2, null space, P3 spectrum") {
  const Graph k2(2, {{0, 1, 1.0}});
  Eigen::MatrixXd expect(2, 2);
  expect << 1, -1, -1, 1;
  CHECK((Eigen::MatrixXd(normalized_laplacian(k2)) - expect).cwiseAbs().maxCoeff() < 1e-15);

  const Graph p3(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const Eigen::MatrixXd L = Eigen::MatrixXd(normalized_laplacian(p3));
  const Eigen::VectorXd null_vec = p3.degrees().cwiseSqrt();
  CHECK((L * null_vec).cwiseAbs().maxCoeff() < 1e-14);
  const SpectralBasis basis = eigendecompose(L);
  CHECK(basis.theta[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(basis.theta[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(basis.theta[2] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("combinatorial laplacian: K2, zero row sums, P3") {
  const Graph k2(2, {{0, 1, 1.0}});
  Eigen::MatrixXd expect(2, 2);
  expect << 1, -1, -1, 1;
  CHECK((Eigen::MatrixXd(combinatorial_laplacian(k2)) - expect).cwiseAbs().maxCoeff() < 1e-15);

  const Graph g = random_geometric_graph(30, 0.35, 1);
  const Eigen::MatrixXd L = Eigen::MatrixXd(combinatorial_laplacian(g));
  CHECK((L * Eigen::VectorXd::Ones(g.n())).cwiseAbs().maxCoeff() < 1e-12);

  const Graph p3(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const Eigen::MatrixXd Lp = Eigen::MatrixXd(combinatorial_laplacian(p3));
  Eigen::MatrixXd want(3, 3);
  want << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK((Lp - want).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("normalized laplacian eigenvalues lie in [0, 2]") {
  for (int trial = 0; trial < 4; ++trial) {
    const Graph g = random_geometric_graph(100 + 25 * trial, 0.0, 100 + trial);
    check_graph_invariants(g);
    const SpectralBasis basis = eigendecompose(normalized_laplacian(g));
    CHECK(basis.theta.minCoeff() >= -1e-9);
    CHECK(basis.theta.maxCoeff() <= 2.0 + 1e-9);
  }
}

TEST_CASE("generators: grid shape and coordinates") {
  const Graph g = grid_graph(3, 4);
  CHECK(g.n() == 12);
  CHECK(g.edge_count() == 3 * 3 + 2 * 4);  // horizontal + vertical
  CHECK(g.has_coords());
  check_graph_invariants(g);
}

TEST_CASE("generators: random geometric graph is deterministic per seed") {
  const Graph a = random_geometric_graph(60, 0.0, 42);
  const Graph b = random_geometric_graph(60, 0.0, 42);
  const Graph c = random_geometric_graph(60, 0.0, 43);
  CHECK(a.content_hash() == b.content_hash());
  CHECK(a.content_hash() != c.content_hash());
  check_graph_invariants(a);
}

TEST_CASE("coords csv: header required and ids contiguous") {
  const std::string good = write_temp("gds_coords_ok.csv", "id,lat,lon\n0,0.0,0.0\n1,1.0,0.5\n");
  const Eigen::MatrixX2d coords = load_coords_csv(good);
  CHECK(coords.rows() == 2);
  CHECK(coords(1, 0) == doctest::Approx(1.0));

  CHECK_THROWS_AS(load_coords_csv(write_temp("gds_coords_nohdr.csv", "0,0.0,0.0\n1,1.0,0.5\n")),
                  Error);
  CHECK_THROWS_AS(
      load_coords_csv(write_temp("gds_coords_gap.csv", "id,lat,lon\n0,0,0\n2,1,1\n")), Error);
}
