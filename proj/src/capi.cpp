#include "gds_c.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "gds/commands.hpp"
#include "gds/dynamics.hpp"
#include "gds/error.hpp"
#include "gds/experiments.hpp"
#include "gds/graph.hpp"
#include "gds/sampling.hpp"
#include "gds/spectral.hpp"

struct gds_graph {
  gds::Graph impl;
};

struct gds_spectral {
  gds::SpectralBasis impl;
};

struct gds_config {
  gds::Config impl;
  mutable std::string scratch;  // backs gds_config_get
};

namespace {

thread_local std::string t_last_error;

gds_status map_code(gds::ErrorCode code) {
  switch (code) {
    case gds::ErrorCode::InvalidArgument:
      return GDS_ERR_INVALID_ARGUMENT;
    case gds::ErrorCode::Io:
      return GDS_ERR_IO;
    case gds::ErrorCode::Parse:
      return GDS_ERR_PARSE;
    case gds::ErrorCode::Numeric:
      return GDS_ERR_NUMERIC;
    case gds::ErrorCode::RankDeficient:
      return GDS_ERR_RANK_DEFICIENT;
    case gds::ErrorCode::NoConvergence:
      return GDS_ERR_NO_CONVERGENCE;
    case gds::ErrorCode::Internal:
      return GDS_ERR_INTERNAL;
  }
  return GDS_ERR_INTERNAL;
}

template <typename Fn>
gds_status guarded(Fn&& fn) {
  try {
    fn();
    return GDS_OK;
  } catch (const gds::Error& e) {
    t_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return GDS_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return GDS_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

gds_status require(bool cond, const char* message) {
  if (cond) return GDS_OK;
  t_last_error = message;
  return GDS_ERR_INVALID_ARGUMENT;
}

using CommandFn = std::string (*)(const gds::Config&, const std::string&);

gds_status run_command(CommandFn fn, const gds_config* cfg, const char* out_path,
                       char** out_json) {
  const gds_status pre = require(cfg != nullptr, "config handle is NULL");
  if (pre != GDS_OK) return pre;
  return guarded([&] {
    const std::string summary = fn(cfg->impl, out_path ? out_path : "");
    if (out_json) *out_json = dup_string(summary);
  });
}

}  // namespace

extern "C" {

const char* gds_version(void) { return "0.1.0"; }

const char* gds_status_name(gds_status status) {
  switch (status) {
    case GDS_OK:
      return "ok";
    case GDS_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case GDS_ERR_IO:
      return "io error";
    case GDS_ERR_PARSE:
      return "parse error";
    case GDS_ERR_NUMERIC:
      return "numeric error";
    case GDS_ERR_RANK_DEFICIENT:
      return "rank deficient";
    case GDS_ERR_NO_CONVERGENCE:
      return "no convergence";
    case GDS_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown";
}

const char* gds_last_error(void) { return t_last_error.c_str(); }

void gds_string_free(char* s) { std::free(s); }

gds_status gds_graph_load_edge_list(const char* path, gds_graph** out) {
  const gds_status pre = require(path && out, "path/out must not be NULL");
  if (pre != GDS_OK) return pre;
  return guarded([&] { *out = new gds_graph{gds::load_edge_list(path)}; });
}

gds_status gds_graph_from_knn_file(const char* coords_csv, int k, gds_graph** out) {
  const gds_status pre = require(coords_csv && out, "path/out must not be NULL");
  if (pre != GDS_OK) return pre;
  return guarded([&] { *out = new gds_graph{gds::build_knn_graph(gds::load_coords_csv(coords_csv), k)}; });
}

gds_status gds_graph_from_knn(const double* coords_xy, int n, int k, gds_graph** out) {
  const gds_status pre = require(coords_xy && out && n > 0, "invalid knn arguments");
  if (pre != GDS_OK) return pre;
  return guarded([&] {
    Eigen::MatrixX2d coords(n, 2);
    for (int i = 0; i < n; ++i) {
      coords(i, 0) = coords_xy[2 * i];
      coords(i, 1) = coords_xy[2 * i + 1];
    }
    *out = new gds_graph{gds::build_knn_graph(coords, k)};
  });
}

gds_status gds_graph_grid(int rows, int cols, gds_graph** out) {
  const gds_status pre = require(out != nullptr, "out must not be NULL");
  if (pre != GDS_OK) return pre;
  return guarded([&] { *out = new gds_graph{gds::grid_graph(rows, cols)}; });
}

gds_status gds_graph_random_geometric(int n, double radius, uint64_t seed, gds_graph** out) {
  const gds_status pre = require(out != nullptr, "out must not be NULL");
  if (pre != GDS_OK) return pre;
  return guarded([&] { *out = new gds_graph{gds::random_geometric_graph(n, radius, seed)}; });
}

gds_status gds_graph_save_edge_list(const gds_graph* g, const char* path) {
  const gds_status pre = require(g && path, "graph/path must not be NULL");
  if (pre != GDS_OK) return pre;
  return guarded([&] { gds::save_edge_list(g->impl, path); });
}

int gds_graph_nodes(const gds_graph* g) { return g ? g->impl.n() : 0; }

int64_t gds_graph_edges(const gds_graph* g) { return g ? g->impl.edge_count() : 0; }

gds_status gds_graph_degrees(const gds_graph* g, double* out) {
  const gds_status pre = require(g && out, "graph/out must not be NULL");
  if (pre != GDS_OK) return pre;
  return guarded([&] {
    const Eigen::VectorXd& deg = g->impl.degrees();
    std::memcpy(out, deg.data(), sizeof(double) * deg.size());
  });
}

uint64_t gds_graph_hash(const gds_graph* g) { return g ? g->impl.content_hash() : 0; }

void gds_graph_free(gds_graph* g) { delete g; }

gds_status gds_spectral_compute(const gds_graph* g, gds_laplacian_kind kind, gds_spectral** out) {
  const gds_status pre = require(g && out, "graph/out must not be NULL");
  if (pre != GDS_OK) return pre;
  return guarded([&] {
    const Eigen::SparseMatrix<double> L = kind == GDS_LAPLACIAN_COMBINATORIAL
                                              ? gds::combinatorial_laplacian(g->impl)
                                              : gds::normalized_laplacian(g->impl);
    *out = new gds_spectral{gds::eigendecompose(L)};
  });
}

int gds_spectral_size(const gds_spectral* sp) { return sp ? sp->impl.n() : 0; }

gds_status gds_spectral_eigenvalues(const gds_spectral* sp, double* out) {
  const gds_status pre = require(sp && out, "spectral/out must not be NULL");
  if (pre != GDS_OK) return pre;
  return guarded([&] {
    std::memcpy(out, sp->impl.theta.data(), sizeof(double) * sp->impl.theta.size());
  });
}

gds_status gds_spectral_bandwidth_for_energy(const gds_spectral* sp, const double* signals,
                                             int num_signals, double fraction, int* out_k) {
  const gds_status pre =
      require(sp && signals && out_k && num_signals > 0, "invalid bandwidth arguments");
  if (pre != GDS_OK) return pre;
  return guarded([&] {
    const Eigen::Map<const Eigen::MatrixXd> mat(signals, sp->impl.n(), num_signals);
    *out_k = gds::bandwidth_for_energy(sp->impl, mat, fraction);
  });
}

void gds_spectral_free(gds_spectral* sp) { delete sp; }

gds_status gds_sample_complexity(double nu, double c, int k, double delta, double eps,
                                 int64_t* out_m) {
  const gds_status pre = require(out_m != nullptr, "out must not be NULL");
  if (pre != GDS_OK) return pre;
  return guarded([&] { *out_m = gds::sample_complexity(nu, c, k, delta, eps); });
}

gds_status gds_stability_bounds(const double* lambda, int n, int k, int s, double* out_c,
                                double* out_C) {
  const gds_status pre =
      require(lambda && out_c && out_C && n > 0, "invalid stability arguments");
  if (pre != GDS_OK) return pre;
  return guarded([&] {
    const Eigen::Map<const Eigen::VectorXd> lam(lambda, n);
    const gds::StabilityBounds bounds = gds::stability_bounds(lam, k, s);
    *out_c = bounds.c;
    *out_C = bounds.C;
  });
}

gds_status gds_config_create(gds_config** out) {
  const gds_status pre = require(out != nullptr, "out must not be NULL");
  if (pre != GDS_OK) return pre;
  return guarded([&] { *out = new gds_config{}; });
}

gds_status gds_config_load(const char* path, gds_config** out) {
  const gds_status pre = require(path && out, "path/out must not be NULL");
  if (pre != GDS_OK) return pre;
  return guarded([&] { *out = new gds_config{gds::Config::from_file(path), {}}; });
}

gds_status gds_config_set(gds_config* cfg, const char* key, const char* value) {
  const gds_status pre = require(cfg && key && value, "config/key/value must not be NULL");
  if (pre != GDS_OK) return pre;
  return guarded([&] { cfg->impl.set(key, value); });
}

const char* gds_config_get(const gds_config* cfg, const char* key) {
  if (!cfg || !key || !cfg->impl.has(key)) return nullptr;
  cfg->scratch = cfg->impl.get_str(key);
  return cfg->scratch.c_str();
}

void gds_config_free(gds_config* cfg) { delete cfg; }

gds_status gds_cmd_graph_build(const gds_config* cfg, const char* out_path, char** out_json) {
  return run_command(&gds::cmd::graph_build, cfg, out_path, out_json);
}

gds_status gds_cmd_simulate(const gds_config* cfg, const char* out_path, char** out_json) {
  return run_command(&gds::cmd::simulate, cfg, out_path, out_json);
}

gds_status gds_cmd_coherence(const gds_config* cfg, const char* out_path, char** out_json) {
  return run_command(&gds::cmd::coherence, cfg, out_path, out_json);
}

gds_status gds_cmd_complexity(const gds_config* cfg, const char* out_path, char** out_json) {
  return run_command(&gds::cmd::complexity, cfg, out_path, out_json);
}

gds_status gds_cmd_recover(const gds_config* cfg, const char* out_path, char** out_json) {
  return run_command(&gds::cmd::recover, cfg, out_path, out_json);
}

gds_status gds_cmd_rip_check(const gds_config* cfg, const char* out_path, char** out_json) {
  return run_command(&gds::cmd::rip_check, cfg, out_path, out_json);
}

gds_status gds_cmd_experiment_synthetic(const gds_config* cfg, const char* out_dir,
                                        char** out_json) {
  return run_command(&gds::cmd::experiment_synthetic, cfg, out_dir, out_json);
}

gds_status gds_cmd_experiment_real(const gds_config* cfg, const char* out_dir, char** out_json) {
  return run_command(&gds::cmd::experiment_real, cfg, out_dir, out_json);
}

}  // extern "C"
