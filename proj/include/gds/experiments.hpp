#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "gds/graph.hpp"
#include "gds/recovery.hpp"

namespace gds {

/// Flat key-value configuration with dotted keys. Lines are `key = value`;
/// blank lines and `#` comments are ignored; later assignments win.
class Config {
 public:
  Config() = default;
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;
  std::vector<long long> get_int_list(const std::string& key) const;
  std::vector<long long> get_int_list(const std::string& key,
                                      const std::vector<long long>& fallback) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

struct TrialRecord {
  long long trial = 0;
  std::uint64_t seed = 0;
  std::string method;  // "least-squares" or "regularized"
  int regime = 2;
  int n = 0, k = 0, s = 0;
  long long m_total = 0;
  int m_per_step = 0;
  double sigma = 0.0;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double rate = std::numeric_limits<double>::quiet_NaN();
  double re_joint = std::numeric_limits<double>::quiet_NaN();
  double re_x0 = std::numeric_limits<double>::quiet_NaN();
  double re_w = std::numeric_limits<double>::quiet_NaN();
  double mae_joint = std::numeric_limits<double>::quiet_NaN();
  double mae_x0 = std::numeric_limits<double>::quiet_NaN();
  double mae_w = std::numeric_limits<double>::quiet_NaN();
  double mape_joint = std::numeric_limits<double>::quiet_NaN();
  double mape_x0 = std::numeric_limits<double>::quiet_NaN();
  double mape_w = std::numeric_limits<double>::quiet_NaN();
  double c = std::numeric_limits<double>::quiet_NaN();
  double C = std::numeric_limits<double>::quiet_NaN();
  double nu = std::numeric_limits<double>::quiet_NaN();
  double R = std::numeric_limits<double>::quiet_NaN();
  double emp_delta = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = true;
  bool rank_deficient = false;
  double runtime_ms = 0.0;
};

std::string trial_csv_header();
std::string trial_csv_row(const TrialRecord& rec);

struct AlphaSearch {
  double lo = 1e-3;
  double hi = 1e3;
  int grid_points = 61;
  int refine_iters = 40;
};

struct AlphaFit {
  double alpha = 0.0;
  Eigen::VectorXd w;
  double objective = 0.0;
};

/// Fits the diffusion rate of x_{t+1} = exp(-alpha L) x_t + w to fully
/// observed snapshots: log-spaced grid search plus golden-section refinement;
/// at each alpha the source is the least-squares residual mean.
AlphaFit estimate_alpha(const Eigen::MatrixXd& training, const SpectralBasis& basis,
                        const AlphaSearch& search = {});

struct ExperimentOutput {
  std::vector<TrialRecord> records;
  std::string manifest_json;
};

/// Parameter sweep on generated data: draws bandlimited [x0; w], evolves,
/// samples under the configured regime, reconstructs, and records metrics.
ExperimentOutput run_synthetic(const Config& cfg);

/// Real-series protocol: kNN graph from coordinates, diffusion rate estimated
/// on a training window, bandwidth chosen by spectral energy, then per-rate
/// sampling and reconstruction scored at unsampled points.
ExperimentOutput run_real(const Config& cfg);

/// Writes manifest.json, trials.csv, summary.csv (p25/p50/p75 per parameter
/// point) and, for regularized sweeps, success-rate heatmaps over
/// (gamma, sample count). Returns the written paths.
std::vector<std::string> emit_results(const ExperimentOutput& out, const std::string& dir);

// Shared config-driven construction, also used by the CLI commands.
Graph build_graph_from_config(const Config& cfg, std::uint64_t default_seed);
Eigen::SparseMatrix<double> laplacian_from_config(const Config& cfg, const Graph& g,
                                                  bool real_pipeline);
SpectralBasis basis_for_config(const Config& cfg, const Graph& g,
                               const Eigen::SparseMatrix<double>& L, bool real_pipeline);

/// Time-series CSV: rows = nodes, columns = time steps, header row of
/// timestamps.
Eigen::MatrixXd load_series_csv(const std::string& path);
void save_series_csv(const Eigen::MatrixXd& series, const std::string& path);

}  // namespace gds
