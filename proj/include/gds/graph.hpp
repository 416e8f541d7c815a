#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gds {

struct Edge {
  int i;
  int j;
  double weight;
};

/// Simple undirected weighted graph. Weights are stored symmetrically with a
/// zero diagonal; every node must have positive degree. Construction fails on
/// self-loops, nonpositive weights, conflicting duplicate edges (disagreement
/// beyond 1e-12 relative) and isolated nodes.
class Graph {
 public:
  Graph(int n, const std::vector<Edge>& edges,
        std::optional<Eigen::MatrixX2d> coords = std::nullopt);

  int n() const { return n_; }
  std::int64_t edge_count() const { return edge_count_; }
  const Eigen::SparseMatrix<double>& weights() const { return weights_; }
  Eigen::MatrixXd dense_weights() const { return Eigen::MatrixXd(weights_); }
  const Eigen::VectorXd& degrees() const { return degrees_; }

  bool has_coords() const { return coords_.has_value(); }
  const Eigen::MatrixX2d& coords() const;

  /// Canonical edge list (i < j, lexicographically sorted).
  std::vector<Edge> undirected_edges() const;

  /// FNV-1a hash over the canonical edge list; used to key cached spectra.
  std::uint64_t content_hash() const;

 private:
  int n_ = 0;
  std::int64_t edge_count_ = 0;
  Eigen::SparseMatrix<double> weights_;
  Eigen::VectorXd degrees_;
  std::optional<Eigen::MatrixX2d> coords_;
};

/// Reads rows `i,j,weight` with 0-based contiguous node ids; each listed edge
/// is set in both directions. Duplicate listings must agree within 1e-12
/// relative.
Graph load_edge_list(const std::string& path);

/// Writes the canonical undirected edge list, one `i,j,weight` row per edge.
void save_edge_list(const Graph& g, const std::string& path);

/// Reads a coordinates CSV `id,lat,lon` (header row required, ids 0..n-1).
Eigen::MatrixX2d load_coords_csv(const std::string& path);

/// k-nearest-neighbour graph with Gaussian kernel weights
/// w(i,j) = exp(-||r_i - r_j||^2 / sigma^2), sigma = mean edge length over
/// the symmetrized (union) edge set, each edge counted once. Distance ties at
/// the k-th neighbour are broken by lower node index.
Graph build_knn_graph(const Eigen::MatrixX2d& coords, int k);

/// rows x cols 4-neighbour lattice, unit weights, planar coordinates.
Graph grid_graph(int rows, int cols);

/// Random geometric graph on the unit square: nodes uniform, edges between
/// pairs closer than `radius`, Gaussian kernel weights as in build_knn_graph.
/// Nodes left isolated by the radius rule are attached to their nearest
/// neighbour. radius <= 0 selects a connectivity heuristic.
Graph random_geometric_graph(int n, double radius, std::uint64_t seed);

/// N = D^{-1/2} W D^{-1/2}; symmetric with spectral radius <= 1.
Eigen::SparseMatrix<double> normalized_diffusion(const Graph& g);

/// L = I - N; symmetric PSD with eigenvalues in [0, 2].
Eigen::SparseMatrix<double> normalized_laplacian(const Graph& g);

/// L = D - W; symmetric PSD with zero row sums.
Eigen::SparseMatrix<double> combinatorial_laplacian(const Graph& g);

}  // namespace gds
