#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gds/commands.hpp"
#include "gds/dynamics.hpp"
#include "gds/error.hpp"
#include "gds/experiments.hpp"
#include "gds/metrics.hpp"

using namespace gds;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("config: parsing, comments, overrides, lists") {
  const Config cfg = Config::from_string(
      "# experiment\n"
      "graph.n = 40\n"
      "sigma = 0,1e-4,1e-2  # noise sweep\n"
      "alpha = 30\n"
      "strict = true\n"
      "alpha = 12.5\n");
  CHECK(cfg.get_int("graph.n") == 40);
  CHECK(cfg.get_double("alpha") == doctest::Approx(12.5));  // later assignment wins
  CHECK(cfg.get_bool("strict", false));
  CHECK(cfg.get_double_list("sigma") == std::vector<double>{0.0, 1e-4, 1e-2});
  CHECK(cfg.get_int("missing", 7) == 7);
  CHECK_THROWS_AS(cfg.get_str("missing"), Error);
  CHECK_THROWS_AS(Config::from_string("key_without_value\n"), Error);
  CHECK_THROWS_AS(Config::from_string("a = b\n").get_int("a"), Error);
}

TEST_CASE("series csv round trip and shape validation") {
  Eigen::MatrixXd series(4, 6);
  for (int i = 0; i < 4; ++i)
    for (int t = 0; t < 6; ++t) series(i, t) = 0.1 * i - 0.7 * t;
  const std::string path = (fs::temp_directory_path() / "gds_series.csv").string();
  save_series_csv(series, path);
  const Eigen::MatrixXd loaded = load_series_csv(path);
  CHECK((loaded - series).cwiseAbs().maxCoeff() == 0.0);

  std::ofstream bad(fs::temp_directory_path() / "gds_series_bad.csv");
  bad << "0,1,2\n1.0,2.0\n";
  bad.close();
  CHECK_THROWS_AS(load_series_csv((fs::temp_directory_path() / "gds_series_bad.csv").string()),
                  Error);
}

TEST_CASE("estimate_alpha: recovers the generating rate and source") {
  Rng rng(3);
  const Graph g = random_geometric_graph(35, 0.0, 21);
  const SpectralBasis basis = eigendecompose(normalized_laplacian(g));
  const int n = g.n();

  for (double alpha0 : {1.5, 12.0}) {
    const ShiftSpectrum shift = shift_from_heat(basis, alpha0);
    const AffineSystem sys(basis, shift, 10);
    Eigen::VectorXd x0(n), w(n);
    for (int i = 0; i < n; ++i) {
      x0[i] = rng.normal();
      w[i] = rng.normal();
    }
    const Eigen::MatrixXd training = evolve(sys, x0, w);
    const AlphaFit fit = estimate_alpha(training, basis);
    CHECK(std::abs(fit.alpha - alpha0) <= 1e-3 * alpha0);
    CHECK((fit.w - w).norm() <= 1e-6 * w.norm());
    CHECK(fit.objective <= 1e-12);
  }
}

TEST_CASE("estimate_alpha: homogeneous data fits a near-zero source") {
  Rng rng(5);
  const Graph g = random_geometric_graph(30, 0.0, 23);
  const SpectralBasis basis = eigendecompose(normalized_laplacian(g));
  const ShiftSpectrum shift = shift_from_heat(basis, 4.0);
  const AffineSystem sys(basis, shift, 8);
  Eigen::VectorXd x0(g.n());
  for (int i = 0; i < g.n(); ++i) x0[i] = rng.normal();
  const Eigen::MatrixXd training = evolve(sys, x0, Eigen::VectorXd::Zero(g.n()));
  const AlphaFit fit = estimate_alpha(training, basis);
  CHECK(std::abs(fit.alpha - 4.0) <= 1e-3 * 4.0);
  CHECK(fit.w.norm() <= 1e-6 * x0.norm());
}

TEST_CASE("estimate_alpha: rejects short windows") {
  Rng rng(7);
  const Graph g = random_geometric_graph(10, 0.0, 29);
  const SpectralBasis basis = eigendecompose(normalized_laplacian(g));
  CHECK_THROWS_AS(estimate_alpha(Eigen::MatrixXd::Zero(10, 2), basis), Error);
}

TEST_CASE("emit_results: empty stream writes manifest and header-only CSV") {
  ExperimentOutput out;
  out.manifest_json = "{\"kind\": \"synthetic\"}";
  const std::string dir = temp_dir("gds_emit_empty");
  const auto files = emit_results(out, dir);
  CHECK(files.size() == 3);  // manifest, trials, summary
  const std::string trials = slurp(dir + "/trials.csv");
  CHECK(trials == trial_csv_header() + "\n");
}

TEST_CASE("emit_results: percentile summary over one point") {
  ExperimentOutput out;
  out.manifest_json = "{}";
  for (int i = 0; i < 50; ++i) {
    TrialRecord rec;
    rec.trial = i;
    rec.method = "least-squares";
    rec.re_joint = 0.01 * (i + 1);
    out.records.push_back(rec);
  }
  const std::string dir = temp_dir("gds_emit_summary");
  emit_results(out, dir);
  const std::string summary = slurp(dir + "/summary.csv");
  // Header plus exactly one group row with three percentiles.
  CHECK(summary.find("re_p25,re_p50,re_p75") != std::string::npos);
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 2);
  CHECK(summary.find(",50,") != std::string::npos);
}

TEST_CASE("run_synthetic: record grid, manifest audit fields, determinism") {
  const Config cfg = Config::from_string(
      "graph.source = generator\n"
      "graph.generator = grid\n"
      "graph.rows = 6\n"
      "graph.cols = 6\n"
      "k = 3\n"
      "s = 4\n"
      "regime = time-varying\n"
      "M = 16,24\n"
      "sigma = 0,1e-4\n"
      "trials = 3\n"
      "seed = 77\n"
      "strict = true\n");
  const ExperimentOutput out = run_synthetic(cfg);
  CHECK(out.records.size() == 2 * 2 * 3);
  for (const TrialRecord& rec : out.records) {
    CHECK(rec.n == 36);
    CHECK(rec.c > 0.0);
    CHECK(rec.C >= rec.c);
    CHECK(rec.nu > 0.0);
    CHECK(std::isfinite(rec.re_joint));
    CHECK(rec.runtime_ms == 0.0);  // strict mode
  }
  CHECK(out.manifest_json.find("min_m_per_step") != std::string::npos);
  CHECK(out.manifest_json.find("\"nu\"") != std::string::npos);

  // Byte-identical reruns, independent of the worker count.
  Config threaded = cfg;
  threaded.set("threads", "3");
  const ExperimentOutput again = run_synthetic(threaded);
  REQUIRE(again.records.size() == out.records.size());
  for (std::size_t i = 0; i < out.records.size(); ++i)
    CHECK(trial_csv_row(again.records[i]) == trial_csv_row(out.records[i]));
}

TEST_CASE("run_synthetic: fixed regime reuses one node set and records it") {
  const Config cfg = Config::from_string(
      "graph.generator = grid\n"
      "graph.rows = 6\n"
      "graph.cols = 6\n"
      "k = 3\n"
      "s = 4\n"
      "regime = fixed\n"
      "M = 32\n"
      "sigma = 0\n"
      "trials = 4\n"
      "seed = 19\n"
      "strict = true\n");
  const ExperimentOutput out = run_synthetic(cfg);
  REQUIRE(out.records.size() == 4);
  for (const TrialRecord& rec : out.records) {
    CHECK(rec.regime == 1);
    CHECK(rec.m_per_step == 8);
    CHECK(rec.re_joint <= 1e-6);  // noiseless, well-sampled
  }
  // Fixed-regime coherence is the horizon-summed scalar.
  CHECK(out.manifest_json.find("nu_per_t") == std::string::npos);
}

TEST_CASE("recover command: samples artifact round trips") {
  Config cfg;
  cfg.set("graph.generator", "grid");
  cfg.set("graph.rows", "5");
  cfg.set("graph.cols", "5");
  cfg.set("k", "2");
  cfg.set("s", "3");
  cfg.set("M", "12");
  cfg.set("sigma", "1e-3");
  cfg.set("seed", "4");
  cfg.set("save_samples", "true");
  const std::string dir = temp_dir("gds_recover_cmd");
  const std::string out_path = dir + "/result.json";
  const std::string summary = cmd::recover(cfg, out_path);
  CHECK(summary.find("re_joint") != std::string::npos);
  CHECK(fs::exists(out_path));
  CHECK(fs::exists(out_path + ".samples.json"));

  SampleSet set;
  Measurements meas;
  std::uint64_t seed = 0;
  samples_from_json(slurp(out_path + ".samples.json"), set, meas, seed);
  CHECK(set.s() == 3);
  CHECK(set.total() == 12);
  CHECK(meas.sigma == 1e-3);
  CHECK(seed == 4);
}

TEST_CASE("run_synthetic: infeasible equal split is rejected") {
  const Config cfg = Config::from_string(
      "graph.generator = grid\n"
      "graph.rows = 4\n"
      "graph.cols = 4\n"
      "k = 2\n"
      "s = 3\n"
      "M = 10\n"
      "trials = 1\n");
  CHECK_THROWS_AS(run_synthetic(cfg), Error);
}

TEST_CASE("run_real: model-generated series is reconstructed almost exactly") {
  // Synthetic data in the real-series format: a kNN graph from random
  // coordinates, evolved from bandlimited initial state and source.
  Rng rng(11);
  const int n = 30, s0 = 6, s = 8, T = 20;
  Eigen::MatrixX2d coords(n, 2);
  for (int i = 0; i < n; ++i) {
    coords(i, 0) = rng.uniform01();
    coords(i, 1) = rng.uniform01();
  }
  const Graph g = build_knn_graph(coords, 4);
  const SpectralBasis basis = eigendecompose(combinatorial_laplacian(g));
  const double alpha0 = 2.5;
  const ShiftSpectrum shift = shift_from_heat(basis, alpha0);
  const AffineSystem sys(basis, shift, T);
  Eigen::VectorXd x0 = random_bandlimited(basis, 3, rng) + Eigen::VectorXd::Constant(n, 3.0);
  Eigen::VectorXd w = random_bandlimited(basis, 3, rng);
  const Eigen::MatrixXd series = evolve(sys, x0, w);

  const std::string dir = temp_dir("gds_real_data");
  const std::string series_path = dir + "/series.csv";
  const std::string coords_path = dir + "/coords.csv";
  save_series_csv(series, series_path);
  {
    std::ofstream out(coords_path);
    out << "id,lat,lon\n";
    for (int i = 0; i < n; ++i) out << i << ',' << coords(i, 0) << ',' << coords(i, 1) << '\n';
  }

  Config cfg;
  cfg.set("series", series_path);
  cfg.set("coords", coords_path);
  cfg.set("graph.knn_k", "4");
  cfg.set("train_window", std::to_string(s0));
  cfg.set("s", std::to_string(s));
  // The constant offset concentrates the spectral energy, so the 0.9 energy
  // rule would underfit; pin the generating bandwidth instead.
  cfg.set("k", "3");
  cfg.set("rates", "1.0");
  cfg.set("trials", "3");
  cfg.set("seed", "5");
  cfg.set("strict", "true");
  const ExperimentOutput out = run_real(cfg);
  REQUIRE(out.records.size() == 3);
  for (const TrialRecord& rec : out.records) {
    CHECK(rec.rate == doctest::Approx(1.0));
    CHECK(rec.re_joint <= 1e-6);
    CHECK(std::isfinite(rec.mape_joint));
  }
  CHECK(out.manifest_json.find("alpha") != std::string::npos);
}

TEST_CASE("run_real: series shorter than the windows is rejected") {
  const std::string dir = temp_dir("gds_real_short");
  Eigen::MatrixXd series = Eigen::MatrixXd::Ones(8, 5);
  save_series_csv(series, dir + "/series.csv");
  {
    std::ofstream out(dir + "/coords.csv");
    out << "id,lat,lon\n";
    for (int i = 0; i < 8; ++i) out << i << ",0." << i << ",0.1\n";
  }
  Config cfg;
  cfg.set("series", dir + "/series.csv");
  cfg.set("coords", dir + "/coords.csv");
  cfg.set("graph.knn_k", "2");
  CHECK_THROWS_AS(run_real(cfg), Error);
}

TEST_CASE("heatmap emission for regularized sweeps") {
  const Config cfg = Config::from_string(
      "graph.generator = grid\n"
      "graph.rows = 5\n"
      "graph.cols = 5\n"
      "k = 2\n"
      "s = 4\n"
      "method = regularized\n"
      "gamma = 1,100\n"
      "M = 12,20\n"
      "sigma = 0\n"
      "trials = 2\n"
      "seed = 3\n"
      "strict = true\n");
  const ExperimentOutput out = run_synthetic(cfg);
  const std::string dir = temp_dir("gds_emit_heatmap");
  const auto files = emit_results(out, dir);
  bool has_heatmap = false;
  for (const auto& f : files) has_heatmap |= f.find("heatmap") != std::string::npos;
  CHECK(has_heatmap);
  const std::string heatmap = slurp(dir + "/heatmap_sigma_0.csv");
  CHECK(heatmap.find("gamma,M=12,M=20") == 0);
  CHECK(std::count(heatmap.begin(), heatmap.end(), '\n') == 3);  // header + 2 gamma rows
}

TEST_CASE("command summaries are well-formed") {
  Config cfg;
  cfg.set("graph.generator", "grid");
  cfg.set("graph.rows", "4");
  cfg.set("graph.cols", "4");
  cfg.set("k", "2");
  cfg.set("s", "3");
  cfg.set("M", "9");
  cfg.set("seed", "1");

  const std::string coh = cmd::coherence(cfg, "");
  CHECK(coh.find("nu_per_t") != std::string::npos);
  const std::string cpx = cmd::complexity(cfg, "");
  CHECK(cpx.find("m_per_step") != std::string::npos);
  const std::string rec = cmd::recover(cfg, "");
  CHECK(rec.find("re_joint") != std::string::npos);
  const std::string rip = cmd::rip_check(cfg, "");
  CHECK(rip.find("pass_rate") != std::string::npos);
}
