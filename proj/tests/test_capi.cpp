// Exercises the shared-library surface the way an external client would:
// opaque handles, error codes, and the config-driven commands.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "gds_c.h"

static int failures = 0;

#define EXPECT(cond, what)                                        \
  do {                                                            \
    if (!(cond)) {                                                \
      std::fprintf(stderr, "FAIL %s:%d: %s\n", __FILE__, __LINE__, what); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

int main() {
  EXPECT(std::strcmp(gds_version(), "") != 0, "version string");
  EXPECT(std::strcmp(gds_status_name(GDS_OK), "ok") == 0, "status name");

  // Error paths populate the thread-local message.
  gds_graph* missing = nullptr;
  EXPECT(gds_graph_load_edge_list("/nonexistent/edges.csv", &missing) == GDS_ERR_IO,
         "missing file maps to io error");
  EXPECT(std::strlen(gds_last_error()) > 0, "error message set");
  EXPECT(gds_graph_load_edge_list(nullptr, &missing) == GDS_ERR_INVALID_ARGUMENT,
         "null path rejected");

  // Grid graph and degrees through the handle API.
  gds_graph* grid = nullptr;
  EXPECT(gds_graph_grid(4, 5, &grid) == GDS_OK, "grid build");
  EXPECT(gds_graph_nodes(grid) == 20, "grid node count");
  EXPECT(gds_graph_edges(grid) == 4 * 4 + 3 * 5, "grid edge count");
  std::vector<double> degrees(20);
  EXPECT(gds_graph_degrees(grid, degrees.data()) == GDS_OK, "degrees");
  EXPECT(degrees[0] == 2.0, "corner degree");

  // knn from raw coordinates.
  const double coords[] = {0, 0, 1, 0, 2, 0};
  gds_graph* knn = nullptr;
  EXPECT(gds_graph_from_knn(coords, 3, 1, &knn) == GDS_OK, "knn build");
  EXPECT(gds_graph_edges(knn) == 2, "knn edge count");
  EXPECT(gds_graph_from_knn(coords, 3, 5, &knn) == GDS_ERR_INVALID_ARGUMENT,
         "knn k too large rejected");

  // Spectrum of the 2-node complete graph: {0, 2}.
  gds_graph* k2 = nullptr;
  const double k2_coords[] = {0, 0, 1, 0};
  EXPECT(gds_graph_from_knn(k2_coords, 2, 1, &k2) == GDS_OK, "k2 build");
  gds_spectral* sp = nullptr;
  EXPECT(gds_spectral_compute(k2, GDS_LAPLACIAN_NORMALIZED, &sp) == GDS_OK, "eigendecompose");
  EXPECT(gds_spectral_size(sp) == 2, "spectrum size");
  double theta[2] = {-1, -1};
  EXPECT(gds_spectral_eigenvalues(sp, theta) == GDS_OK, "eigenvalues");
  EXPECT(std::fabs(theta[0]) < 1e-12 && std::fabs(theta[1] - 2.0) < 1e-12, "k2 spectrum");

  // Sample complexity worked example: ceil(12 ln 400) = 72.
  int64_t m = 0;
  EXPECT(gds_sample_complexity(1.0, 1.0, 10, 0.5, 0.1, &m) == GDS_OK, "complexity call");
  EXPECT(m == 72, "complexity value");
  EXPECT(gds_sample_complexity(1.0, 0.0, 10, 0.5, 0.1, &m) == GDS_ERR_INVALID_ARGUMENT,
         "degenerate c rejected");

  // Stability bounds: s=2, lambda=1 block gives (3 +- sqrt 5)/2.
  const double lambda_one = 1.0;
  double c = 0, C = 0;
  EXPECT(gds_stability_bounds(&lambda_one, 1, 1, 2, &c, &C) == GDS_OK, "stability call");
  EXPECT(std::fabs(C - (3.0 + std::sqrt(5.0)) / 2.0) < 1e-12, "upper constant");
  EXPECT(std::fabs(c - (3.0 - std::sqrt(5.0)) / 2.0) < 1e-12, "lower constant");

  // Config handles and a full command round trip.
  gds_config* cfg = nullptr;
  EXPECT(gds_config_create(&cfg) == GDS_OK, "config create");
  EXPECT(gds_config_set(cfg, "graph.generator", "grid") == GDS_OK, "config set");
  gds_config_set(cfg, "graph.rows", "5");
  gds_config_set(cfg, "graph.cols", "5");
  gds_config_set(cfg, "k", "2");
  gds_config_set(cfg, "s", "4");
  gds_config_set(cfg, "M", "16");
  gds_config_set(cfg, "seed", "9");
  EXPECT(std::strcmp(gds_config_get(cfg, "k"), "2") == 0, "config get");
  EXPECT(gds_config_get(cfg, "absent") == nullptr, "absent key is NULL");

  char* summary = nullptr;
  EXPECT(gds_cmd_recover(cfg, "", &summary) == GDS_OK, "recover command");
  EXPECT(summary && std::strstr(summary, "re_joint") != nullptr, "recover summary");
  gds_string_free(summary);

  summary = nullptr;
  EXPECT(gds_cmd_coherence(cfg, "", &summary) == GDS_OK, "coherence command");
  EXPECT(summary && std::strstr(summary, "nu_per_t") != nullptr, "coherence summary");
  gds_string_free(summary);

  // Experiment into a temp directory, then rerun: trials.csv must be stable.
  gds_config_set(cfg, "trials", "2");
  gds_config_set(cfg, "sigma", "0");
  gds_config_set(cfg, "strict", "true");
  const std::string dir1 = "/tmp/gds_capi_exp1";
  const std::string dir2 = "/tmp/gds_capi_exp2";
  summary = nullptr;
  EXPECT(gds_cmd_experiment_synthetic(cfg, dir1.c_str(), &summary) == GDS_OK, "experiment 1");
  gds_string_free(summary);
  summary = nullptr;
  EXPECT(gds_cmd_experiment_synthetic(cfg, dir2.c_str(), &summary) == GDS_OK, "experiment 2");
  gds_string_free(summary);
  auto read_file = [](const std::string& path) {
    std::string content;
    if (FILE* f = std::fopen(path.c_str(), "rb")) {
      char buf[4096];
      std::size_t got;
      while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0) content.append(buf, got);
      std::fclose(f);
    }
    return content;
  };
  const std::string a = read_file(dir1 + "/trials.csv");
  const std::string b = read_file(dir2 + "/trials.csv");
  EXPECT(!a.empty() && a == b, "experiment reruns byte-identical");

  // Invalid config keys surface as parse errors, not crashes.
  gds_config_set(cfg, "regime", "sideways");
  EXPECT(gds_cmd_recover(cfg, "", nullptr) == GDS_ERR_PARSE, "bad regime rejected");

  gds_config_free(cfg);
  gds_spectral_free(sp);
  gds_graph_free(k2);
  gds_graph_free(knn);
  gds_graph_free(grid);

  if (failures == 0) std::printf("capi: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
