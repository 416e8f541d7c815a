#include "gds/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "gds/error.hpp"
#include "gds/rng.hpp"

namespace gds {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) fail(ErrorCode::Parse, "trailing characters in " + what + ": '" + s + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorCode::Parse, "cannot parse " + what + ": '" + s + "'");
  }
}

long parse_long(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) fail(ErrorCode::Parse, "trailing characters in " + what + ": '" + s + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorCode::Parse, "cannot parse " + what + ": '" + s + "'");
  }
}

// Gaussian kernel weights over an undirected pair set; sigma is the mean of
// the raw pair distances.
std::vector<Edge> kernel_weights(const Eigen::MatrixX2d& coords,
                                 const std::vector<std::pair<int, int>>& pairs) {
  if (pairs.empty()) fail(ErrorCode::InvalidArgument, "graph has no edges");
  double sigma = 0.0;
  for (const auto& [i, j] : pairs) sigma += (coords.row(i) - coords.row(j)).norm();
  sigma /= static_cast<double>(pairs.size());
  if (sigma <= 0.0) fail(ErrorCode::InvalidArgument, "degenerate coordinates: mean edge length is zero");
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    const double d2 = (coords.row(i) - coords.row(j)).squaredNorm();
    edges.push_back({i, j, std::exp(-d2 / (sigma * sigma))});
  }
  return edges;
}

}  // namespace

Graph::Graph(int n, const std::vector<Edge>& edges, std::optional<Eigen::MatrixX2d> coords)
    : n_(n), coords_(std::move(coords)) {
  if (n <= 0) fail(ErrorCode::InvalidArgument, "graph must have at least one node");
  if (coords_ && coords_->rows() != n)
    fail(ErrorCode::InvalidArgument, "coordinate count does not match node count");

  std::map<std::pair<int, int>, double> canon;
  for (const Edge& e : edges) {
    if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n)
      fail(ErrorCode::InvalidArgument, "edge endpoint out of range: (" + std::to_string(e.i) +
                                           "," + std::to_string(e.j) + ")");
    if (e.i == e.j) fail(ErrorCode::InvalidArgument, "self-loop at node " + std::to_string(e.i));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      fail(ErrorCode::InvalidArgument, "edge weight must be positive and finite");
    const auto key = std::minmax(e.i, e.j);
    const auto [it, inserted] = canon.emplace(key, e.weight);
    if (!inserted) {
      const double ref = it->second;
      if (std::abs(ref - e.weight) > 1e-12 * std::max(std::abs(ref), std::abs(e.weight)))
        fail(ErrorCode::InvalidArgument,
             "conflicting duplicate weights for edge (" + std::to_string(key.first) + "," +
                 std::to_string(key.second) + ")");
    }
  }
  edge_count_ = static_cast<std::int64_t>(canon.size());

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * canon.size());
  for (const auto& [key, w] : canon) {
    trips.emplace_back(key.first, key.second, w);
    trips.emplace_back(key.second, key.first, w);
  }
  weights_.resize(n, n);
  weights_.setFromTriplets(trips.begin(), trips.end());
  weights_.makeCompressed();

  degrees_ = weights_ * Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) {
    if (!(degrees_[i] > 0.0))
      fail(ErrorCode::InvalidArgument, "isolated node " + std::to_string(i));
  }
}

const Eigen::MatrixX2d& Graph::coords() const {
  if (!coords_) fail(ErrorCode::InvalidArgument, "graph has no coordinates");
  return *coords_;
}

std::vector<Edge> Graph::undirected_edges() const {
  std::vector<Edge> out;
  out.reserve(static_cast<std::size_t>(edge_count_));
  for (int col = 0; col < weights_.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(weights_, col); it; ++it) {
      if (it.row() < it.col()) out.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
    }
  }
  std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });
  return out;
}

std::uint64_t Graph::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffULL;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(n_));
  for (const Edge& e : undirected_edges()) {
    mix(static_cast<std::uint64_t>(e.i));
    mix(static_cast<std::uint64_t>(e.j));
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(e.weight));
    std::memcpy(&bits, &e.weight, sizeof(bits));
    mix(bits);
  }
  return h;
}

Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open edge list: " + path);
  std::vector<Edge> edges;
  int max_id = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto fields = split_csv(t);
    if (fields.size() != 3)
      fail(ErrorCode::Parse, path + ":" + std::to_string(lineno) + ": expected 'i,j,weight'");
    const long i = parse_long(fields[0], "node id");
    const long j = parse_long(fields[1], "node id");
    const double w = parse_double(fields[2], "edge weight");
    if (i < 0 || j < 0)
      fail(ErrorCode::Parse, path + ":" + std::to_string(lineno) + ": negative node id");
    if (!(w > 0.0))
      fail(ErrorCode::Parse, path + ":" + std::to_string(lineno) + ": weight must be positive");
    edges.push_back({static_cast<int>(i), static_cast<int>(j), w});
    max_id = std::max({max_id, static_cast<int>(i), static_cast<int>(j)});
  }
  if (edges.empty()) fail(ErrorCode::Parse, "edge list is empty: " + path);
  return Graph(max_id + 1, edges);
}

void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write edge list: " + path);
  char buf[64];
  for (const Edge& e : g.undirected_edges()) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", e.i, e.j, e.weight);
    out << buf;
  }
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

Eigen::MatrixX2d load_coords_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open coordinates: " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Parse, "coordinates file is empty: " + path);
  // Header row is mandatory; reject files that start with data.
  {
    const auto fields = split_csv(line);
    if (fields.size() < 3) fail(ErrorCode::Parse, "coordinates header must be 'id,lat,lon'");
    bool numeric = true;
    try {
      std::size_t pos = 0;
      std::stod(fields[1], &pos);
      numeric = pos == fields[1].size();
    } catch (const std::exception&) {
      numeric = false;
    }
    if (numeric) fail(ErrorCode::Parse, "coordinates file is missing its header row");
  }
  std::vector<std::array<double, 3>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto fields = split_csv(t);
    if (fields.size() != 3)
      fail(ErrorCode::Parse, path + ":" + std::to_string(lineno) + ": expected 'id,lat,lon'");
    rows.push_back({static_cast<double>(parse_long(fields[0], "node id")),
                    parse_double(fields[1], "latitude"), parse_double(fields[2], "longitude")});
  }
  if (rows.empty()) fail(ErrorCode::Parse, "coordinates file has no data rows: " + path);
  Eigen::MatrixX2d coords(rows.size(), 2);
  std::vector<bool> seen(rows.size(), false);
  for (const auto& r : rows) {
    const long id = static_cast<long>(r[0]);
    if (id < 0 || id >= static_cast<long>(rows.size()) || seen[id])
      fail(ErrorCode::Parse, "node ids must be 0..n-1 contiguous and unique");
    seen[id] = true;
    coords(id, 0) = r[1];
    coords(id, 1) = r[2];
  }
  if (!coords.allFinite()) fail(ErrorCode::Parse, "coordinates must be finite");
  return coords;
}

Graph build_knn_graph(const Eigen::MatrixX2d& coords, int k) {
  const int n = static_cast<int>(coords.rows());
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  if (n < k + 1) fail(ErrorCode::InvalidArgument, "need at least k+1 nodes");
  if (!coords.allFinite()) fail(ErrorCode::InvalidArgument, "coordinates must be finite");

  std::vector<std::pair<int, int>> pairs;
  std::vector<std::pair<double, int>> cand(n - 1);
  std::vector<std::vector<bool>> chosen(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) {
    int m = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      cand[m++] = {(coords.row(i) - coords.row(j)).squaredNorm(), j};
    }
    // Ties at the k-th distance resolve to the lower node index.
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    for (int t = 0; t < k; ++t) {
      const int j = cand[t].second;
      const int a = std::min(i, j), b = std::max(i, j);
      if (!chosen[a][b]) {
        chosen[a][b] = true;
        pairs.emplace_back(a, b);
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return Graph(n, kernel_weights(coords, pairs), coords);
}

Graph grid_graph(int rows, int cols) {
  if (rows < 1 || cols < 1) fail(ErrorCode::InvalidArgument, "grid dimensions must be positive");
  if (static_cast<std::int64_t>(rows) * cols < 2)
    fail(ErrorCode::InvalidArgument, "grid must have at least two nodes");
  const int n = rows * cols;
  std::vector<Edge> edges;
  Eigen::MatrixX2d coords(n, 2);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int id = r * cols + c;
      coords(id, 0) = static_cast<double>(c);
      coords(id, 1) = static_cast<double>(r);
      if (c + 1 < cols) edges.push_back({id, id + 1, 1.0});
      if (r + 1 < rows) edges.push_back({id, id + cols, 1.0});
    }
  }
  return Graph(n, edges, coords);
}

Graph random_geometric_graph(int n, double radius, std::uint64_t seed) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "need at least two nodes");
  if (radius <= 0.0) radius = 1.7 * std::sqrt(std::log(static_cast<double>(n)) / (3.14159265358979323846 * n));
  Rng rng(seed, /*stream=*/0x67656f6dULL);
  Eigen::MatrixX2d coords(n, 2);
  for (int i = 0; i < n; ++i) {
    coords(i, 0) = rng.uniform01();
    coords(i, 1) = rng.uniform01();
  }
  const double r2 = radius * radius;
  std::vector<std::pair<int, int>> pairs;
  std::vector<bool> covered(n, false);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if ((coords.row(i) - coords.row(j)).squaredNorm() <= r2) {
        pairs.emplace_back(i, j);
        covered[i] = covered[j] = true;
      }
    }
  }
  // Attach radius-isolated nodes to their nearest neighbour.
  for (int i = 0; i < n; ++i) {
    if (covered[i]) continue;
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (coords.row(i) - coords.row(j)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    pairs.emplace_back(std::min(i, best), std::max(i, best));
    covered[i] = true;
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return Graph(n, kernel_weights(coords, pairs), coords);
}

Eigen::SparseMatrix<double> normalized_diffusion(const Graph& g) {
  const Eigen::VectorXd dinv_sqrt = g.degrees().cwiseSqrt().cwiseInverse();
  Eigen::SparseMatrix<double> out = g.weights();
  for (int col = 0; col < out.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(out, col); it; ++it)
      it.valueRef() *= dinv_sqrt[it.row()] * dinv_sqrt[it.col()];
  return out;
}

Eigen::SparseMatrix<double> normalized_laplacian(const Graph& g) {
  Eigen::SparseMatrix<double> id(g.n(), g.n());
  id.setIdentity();
  Eigen::SparseMatrix<double> out = id - normalized_diffusion(g);
  out.makeCompressed();
  return out;
}

Eigen::SparseMatrix<double> combinatorial_laplacian(const Graph& g) {
  Eigen::SparseMatrix<double> deg(g.n(), g.n());
  deg.reserve(Eigen::VectorXi::Ones(g.n()));
  for (int i = 0; i < g.n(); ++i) deg.insert(i, i) = g.degrees()[i];
  Eigen::SparseMatrix<double> out = deg - g.weights();
  out.makeCompressed();
  return out;
}

}  // namespace gds
