#include "gds/experiments.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "gds/error.hpp"
#include "gds/metrics.hpp"
#include "json.hpp"

namespace gds {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double to_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::Parse, "config key '" + key + "': cannot parse number '" + s + "'");
  }
}

long long to_int(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::Parse, "config key '" + key + "': cannot parse integer '" + s + "'");
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const std::string t = trim(field);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    // Strip comments: '#' at start of line or preceded by whitespace.
    std::size_t cut = std::string::npos;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        cut = i;
        break;
      }
    }
    if (cut != std::string::npos) line = line.substr(0, cut);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::Parse, "config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) fail(ErrorCode::Parse, "config line " + std::to_string(lineno) + ": empty key");
    cfg.set(key, value);
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) { kv_[key] = value; }

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::get_str(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) fail(ErrorCode::Parse, "missing required config key '" + key + "'");
  return it->second;
}

std::string Config::get_str(const std::string& key, const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

long long Config::get_int(const std::string& key) const { return to_int(get_str(key), key); }
long long Config::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}
double Config::get_double(const std::string& key) const { return to_double(get_str(key), key); }
double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_str(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorCode::Parse, "config key '" + key + "': expected boolean, got '" + v + "'");
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : split_list(get_str(key))) out.push_back(to_double(item, key));
  if (out.empty()) fail(ErrorCode::Parse, "config key '" + key + "': empty list");
  return out;
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::vector<double>& fallback) const {
  return has(key) ? get_double_list(key) : fallback;
}

std::vector<long long> Config::get_int_list(const std::string& key) const {
  std::vector<long long> out;
  for (const std::string& item : split_list(get_str(key))) out.push_back(to_int(item, key));
  if (out.empty()) fail(ErrorCode::Parse, "config key '" + key + "': empty list");
  return out;
}

std::vector<long long> Config::get_int_list(const std::string& key,
                                            const std::vector<long long>& fallback) const {
  return has(key) ? get_int_list(key) : fallback;
}

std::string trial_csv_header() {
  return "trial,seed,method,regime,n,k,s,m_total,m_per_step,sigma,gamma,rate,"
         "re_joint,re_x0,re_w,mae_joint,mae_x0,mae_w,mape_joint,mape_x0,mape_w,"
         "c,C,nu,R,emp_delta,iterations,converged,rank_deficient,runtime_ms";
}

std::string trial_csv_row(const TrialRecord& r) {
  std::ostringstream os;
  os << r.trial << ',' << r.seed << ',' << r.method << ',' << r.regime << ',' << r.n << ','
     << r.k << ',' << r.s << ',' << r.m_total << ',' << r.m_per_step << ',' << fmt(r.sigma) << ','
     << fmt(r.gamma) << ',' << fmt(r.rate) << ',' << fmt(r.re_joint) << ',' << fmt(r.re_x0) << ','
     << fmt(r.re_w) << ',' << fmt(r.mae_joint) << ',' << fmt(r.mae_x0) << ',' << fmt(r.mae_w)
     << ',' << fmt(r.mape_joint) << ',' << fmt(r.mape_x0) << ',' << fmt(r.mape_w) << ','
     << fmt(r.c) << ',' << fmt(r.C) << ',' << fmt(r.nu) << ',' << fmt(r.R) << ','
     << fmt(r.emp_delta) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
     << (r.rank_deficient ? 1 : 0) << ',' << fmt(r.runtime_ms);
  return os.str();
}

AlphaFit estimate_alpha(const Eigen::MatrixXd& training, const SpectralBasis& basis,
                        const AlphaSearch& search) {
  const int s0 = static_cast<int>(training.cols());
  if (s0 < 3) fail(ErrorCode::InvalidArgument, "training window must have at least 3 snapshots");
  if (training.rows() != basis.n()) fail(ErrorCode::InvalidArgument, "training size mismatch");
  if (!(search.lo > 0.0) || !(search.hi > search.lo) || search.grid_points < 3)
    fail(ErrorCode::InvalidArgument, "invalid alpha search specification");

  const Eigen::MatrixXd coeffs = basis.U.transpose() * training;
  const int transitions = s0 - 1;

  // Residual objective in the spectral domain; the source fit is the mean
  // residual, which is the per-alpha least-squares minimiser.
  Eigen::VectorXd w_hat(basis.n());
  auto objective = [&](double alpha) {
    const Eigen::ArrayXd lam = (-alpha * basis.theta.array()).exp();
    w_hat.setZero();
    for (int t = 0; t < transitions; ++t)
      w_hat += coeffs.col(t + 1) - (lam * coeffs.col(t).array()).matrix();
    w_hat /= static_cast<double>(transitions);
    double obj = 0.0;
    for (int t = 0; t < transitions; ++t)
      obj += (coeffs.col(t + 1) - (lam * coeffs.col(t).array()).matrix() - w_hat).squaredNorm();
    return obj;
  };

  const double log_lo = std::log(search.lo);
  const double log_hi = std::log(search.hi);
  std::vector<double> grid(search.grid_points), value(search.grid_points);
  int best = 0;
  for (int i = 0; i < search.grid_points; ++i) {
    grid[i] = std::exp(log_lo + (log_hi - log_lo) * i / (search.grid_points - 1));
    value[i] = objective(grid[i]);
    if (!std::isfinite(value[i])) fail(ErrorCode::Numeric, "non-finite objective in alpha search");
    if (value[i] < value[best]) best = i;
  }

  // Refinement bracket around the grid argmin, widened while an endpoint
  // undercuts its inner neighbour (non-unimodal guard).
  int lo_idx = std::max(best - 1, 0);
  int hi_idx = std::min(best + 1, search.grid_points - 1);
  while (lo_idx > 0 && value[lo_idx] < value[lo_idx + 1]) --lo_idx;
  while (hi_idx < search.grid_points - 1 && value[hi_idx] < value[hi_idx - 1]) ++hi_idx;

  double a = std::log(grid[lo_idx]);
  double b = std::log(grid[hi_idx]);
  const double invphi = 0.6180339887498948482;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = objective(std::exp(x1));
  double f2 = objective(std::exp(x2));
  for (int it = 0; it < search.refine_iters; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = objective(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = objective(std::exp(x2));
    }
  }

  AlphaFit fit;
  fit.alpha = std::exp(0.5 * (a + b));
  fit.objective = objective(fit.alpha);
  fit.w = basis.U * w_hat;  // w_hat left over from the last objective call
  return fit;
}

Graph build_graph_from_config(const Config& cfg, std::uint64_t default_seed) {
  const std::string source = cfg.get_str("graph.source", "generator");
  if (source == "edge_list") return load_edge_list(cfg.get_str("graph.edge_list"));
  if (source == "knn") {
    const Eigen::MatrixX2d coords = load_coords_csv(cfg.get_str("graph.coords"));
    return build_knn_graph(coords, static_cast<int>(cfg.get_int("graph.knn_k", 10)));
  }
  if (source == "generator") {
    const std::string kind = cfg.get_str("graph.generator", "random-geometric");
    if (kind == "grid") {
      if (cfg.has("graph.rows") || cfg.has("graph.cols"))
        return grid_graph(static_cast<int>(cfg.get_int("graph.rows")),
                          static_cast<int>(cfg.get_int("graph.cols")));
      const long long n = cfg.get_int("graph.n", 100);
      const int rows = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
      const int cols = static_cast<int>((n + rows - 1) / rows);
      return grid_graph(rows, cols);
    }
    if (kind == "random-geometric") {
      return random_geometric_graph(static_cast<int>(cfg.get_int("graph.n", 500)),
                                    cfg.get_double("graph.radius", 0.0),
                                    static_cast<std::uint64_t>(cfg.get_int("graph.seed",
                                                                           static_cast<long long>(default_seed))));
    }
    fail(ErrorCode::Parse, "unknown graph.generator '" + kind + "'");
  }
  fail(ErrorCode::Parse, "unknown graph.source '" + source + "'");
}

Eigen::SparseMatrix<double> laplacian_from_config(const Config& cfg, const Graph& g,
                                                  bool real_pipeline) {
  const std::string kind = cfg.get_str("laplacian", real_pipeline ? "combinatorial" : "normalized");
  if (kind == "normalized") return normalized_laplacian(g);
  if (kind == "combinatorial") return combinatorial_laplacian(g);
  fail(ErrorCode::Parse, "unknown laplacian '" + kind + "'");
}

SpectralBasis basis_for_config(const Config& cfg, const Graph& g,
                               const Eigen::SparseMatrix<double>& L, bool real_pipeline) {
  const std::string kind = cfg.get_str("laplacian", real_pipeline ? "combinatorial" : "normalized");
  const std::uint64_t key = g.content_hash() ^ (kind == "combinatorial" ? 0x9e3779b97f4a7c15ULL : 0);
  const std::string cache = cfg.get_str("basis_cache", "");
  if (!cache.empty()) {
    if (auto cached = load_basis(cache, key)) return std::move(*cached);
  }
  SpectralBasis basis = eigendecompose(L);
  if (!cache.empty()) save_basis(basis, key, cache);
  return basis;
}

Eigen::MatrixXd load_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open time series: " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Parse, "time series file is empty: " + path);
  const std::size_t T = split_list(line).size();
  if (T < 1) fail(ErrorCode::Parse, "time series header has no columns");
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto fields = split_list(t);
    if (fields.size() != T)
      fail(ErrorCode::Parse, path + ":" + std::to_string(lineno) + ": expected " +
                                 std::to_string(T) + " columns");
    std::vector<double> row;
    row.reserve(T);
    for (const auto& f : fields) row.push_back(to_double(f, "series"));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::Parse, "time series has no data rows: " + path);
  Eigen::MatrixXd series(rows.size(), T);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < T; ++j) series(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return series;
}

void save_series_csv(const Eigen::MatrixXd& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write time series: " + path);
  for (Eigen::Index t = 0; t < series.cols(); ++t) out << (t > 0 ? "," : "") << t;
  out << '\n';
  for (Eigen::Index i = 0; i < series.rows(); ++i) {
    for (Eigen::Index t = 0; t < series.cols(); ++t)
      out << (t > 0 ? "," : "") << fmt(series(i, t));
    out << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

namespace {

struct PointSpec {
  std::string method;
  int s = 0;
  long long m_total = 0;
  int m_per_step = 0;
  double sigma = 0.0;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double rate = std::numeric_limits<double>::quiet_NaN();
};

Regime regime_from_config(const Config& cfg) {
  const std::string v = cfg.get_str("regime", "time-varying");
  if (v == "1" || v == "fixed") return Regime::Fixed;
  if (v == "2" || v == "time-varying") return Regime::TimeVarying;
  fail(ErrorCode::Parse, "unknown regime '" + v + "' (use fixed or time-varying)");
}

std::vector<std::string> methods_from_config(const Config& cfg) {
  const std::string m = cfg.get_str("method", "least-squares");
  if (m == "least-squares" || m == "regularized") return {m};
  if (m == "both") return {"least-squares", "regularized"};
  fail(ErrorCode::Parse, "unknown method '" + m + "'");
}

void run_jobs(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
  const int nthreads = std::max(1, threads);
  if (nthreads == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

nlohmann::json environment_json() {
  nlohmann::json env;
  env["compiler"] = __VERSION__;
  env["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                 "." + std::to_string(EIGEN_MINOR_VERSION);
  return env;
}

nlohmann::json config_json(const Config& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : cfg.entries()) j[key] = value;
  return j;
}

}  // namespace

ExperimentOutput run_synthetic(const Config& cfg) {
  const std::uint64_t master_seed = static_cast<std::uint64_t>(cfg.get_int("seed", 42));
  const int k = static_cast<int>(cfg.get_int("k", 5));
  const int trials = static_cast<int>(cfg.get_int("trials", 50));
  const double alpha = cfg.get_double("alpha", 30.0);
  const double delta = cfg.get_double("delta", 0.5);
  const double eps = cfg.get_double("eps", 0.1);
  const Regime regime = regime_from_config(cfg);
  const std::vector<std::string> methods = methods_from_config(cfg);
  const bool strict = cfg.get_bool("strict", false);
  const int threads = static_cast<int>(cfg.get_int("threads", 1));
  const bool want_emp_delta = cfg.get_bool("diagnostics", true);

  SolverOptions solver;
  solver.tol = cfg.get_double("solver.tol", 1e-10);
  solver.max_iters = static_cast<int>(cfg.get_int("solver.max_iters", -1));
  solver.strict_deterministic = cfg.get_bool("solver.strict_deterministic", strict);

  const Graph graph = build_graph_from_config(cfg, master_seed);
  const int n = graph.n();
  if (k < 1 || k > n) fail(ErrorCode::InvalidArgument, "bandwidth k out of range for the graph");
  const Eigen::SparseMatrix<double> L = laplacian_from_config(cfg, graph, false);
  const SpectralBasis basis = basis_for_config(cfg, graph, L, false);
  const ShiftSpectrum shift = shift_from_heat(basis, alpha);

  const std::vector<long long> s_list = cfg.get_int_list("s", {10});
  std::vector<PointSpec> points;
  const bool has_regularized =
      std::find(methods.begin(), methods.end(), "regularized") != methods.end();
  const std::vector<double> gamma_list =
      has_regularized ? cfg.get_double_list("gamma") : std::vector<double>{};
  const std::vector<double> sigma_list = cfg.get_double_list("sigma", {0.0});

  for (long long s_ll : s_list) {
    const int s = static_cast<int>(s_ll);
    if (s < 1) fail(ErrorCode::InvalidArgument, "s must be >= 1");
    std::vector<std::pair<long long, int>> sizes;  // (m_total, m_per_step)
    if (cfg.has("m_t")) {
      for (long long m : cfg.get_int_list("m_t"))
        sizes.emplace_back(m * s, static_cast<int>(m));
    } else {
      for (long long M : cfg.get_int_list("M", {40})) {
        if (M < s || M % s != 0)
          fail(ErrorCode::InvalidArgument,
               "total sample count " + std::to_string(M) + " is not divisible by s=" + std::to_string(s));
        sizes.emplace_back(M, static_cast<int>(M / s));
      }
    }
    for (const auto& [m_total, m_per_step] : sizes) {
      for (double sigma : sigma_list) {
        for (const std::string& method : methods) {
          if (method == "regularized") {
            for (double gamma : gamma_list) {
              PointSpec p;
              p.method = method;
              p.s = s;
              p.m_total = m_total;
              p.m_per_step = m_per_step;
              p.sigma = sigma;
              p.gamma = gamma;
              points.push_back(p);
            }
          } else {
            PointSpec p;
            p.method = method;
            p.s = s;
            p.m_total = m_total;
            p.m_per_step = m_per_step;
            p.sigma = sigma;
            points.push_back(p);
          }
        }
      }
    }
  }

  // Shared per-horizon data: plans are cheap, diagnostics are not.
  struct HorizonData {
    StabilityBounds bounds;
    double nu = 0.0;
    Eigen::VectorXd nu_per_t;
    long long min_m = 0;
  };
  std::map<int, HorizonData> horizons;
  for (const PointSpec& p : points) {
    if (horizons.count(p.s)) continue;
    HorizonData h;
    h.bounds = stability_bounds(shift.lambda, k, p.s);
    const SamplingPlan probe = SamplingPlan::uniform_per_step(regime, n, p.s, 1);
    if (regime == Regime::Fixed) {
      h.nu = coherence_regime1(basis, shift, k, p.s, probe.p(0));
      h.min_m = h.bounds.c > 0.0 ? sample_complexity(h.nu, h.bounds.c, k, delta, eps) : -1;
    } else {
      h.nu_per_t.resize(p.s);
      long long worst = 0;
      for (int t = 0; t < p.s; ++t) {
        h.nu_per_t[t] = coherence_regime2(basis, shift, k, t, probe.p(t));
        if (h.bounds.c > 0.0)
          worst = std::max(worst, sample_complexity(h.nu_per_t[t], h.bounds.c, k, delta, eps));
      }
      h.nu = h.nu_per_t.maxCoeff();
      h.min_m = h.bounds.c > 0.0 ? worst : -1;
    }
    horizons.emplace(p.s, std::move(h));
  }

  // Shift operator for the basis-free path; dense is fine at these sizes.
  Eigen::MatrixXd dense_shift;
  LinOp apply_shift;
  if (has_regularized) {
    if (n <= 512) {
      dense_shift = materialize_operator(basis, shift);
      apply_shift = [&dense_shift](const Eigen::VectorXd& x) { return dense_shift * x; };
    } else {
      apply_shift = [&basis, &shift](const Eigen::VectorXd& x) {
        return basis.U * (shift.lambda.array() * (basis.U.transpose() * x).array()).matrix();
      };
    }
  }
  const RegularizerPoly g = RegularizerPoly::monomial(static_cast<int>(cfg.get_int("g.degree", 4)));

  struct Job {
    std::size_t point;
    int trial;
    long long global;
  };
  std::vector<Job> jobs;
  jobs.reserve(points.size() * static_cast<std::size_t>(trials));
  long long global = 0;
  for (std::size_t p = 0; p < points.size(); ++p)
    for (int trial = 0; trial < trials; ++trial) jobs.push_back({p, trial, global++});

  std::vector<TrialRecord> records(jobs.size());
  run_jobs(jobs.size(), threads, [&](std::size_t idx) {
    const Job& job = jobs[idx];
    const PointSpec& p = points[job.point];
    const HorizonData& h = horizons.at(p.s);
    const auto t_start = std::chrono::steady_clock::now();

    Rng rng(master_seed, static_cast<std::uint64_t>(job.global));
    const AffineSystem sys(basis, shift, p.s);
    const SamplingPlan plan =
        SamplingPlan::uniform_per_step(regime, n, p.s, p.m_per_step, master_seed);

    Eigen::VectorXd truth(2 * n);
    truth.head(n) = random_bandlimited(basis, k, rng);
    truth.tail(n) = random_bandlimited(basis, k, rng);
    const Eigen::MatrixXd traj = evolve(sys, truth.head(n), truth.tail(n));
    const SampleSet set = draw_samples(plan, rng);
    const Measurements meas = measure(traj, set, p.sigma, rng);

    RecoveryResult res;
    if (p.method == "regularized") {
      res = recover_regularized(meas, set, plan, apply_shift, L, g, p.gamma, p.s, solver);
    } else {
      res = recover_known_basis(meas, set, plan, sys, k);
    }

    TrialRecord rec;
    rec.trial = job.global;
    rec.seed = master_seed;
    rec.method = p.method;
    rec.regime = regime == Regime::Fixed ? 1 : 2;
    rec.n = n;
    rec.k = k;
    rec.s = p.s;
    rec.m_total = p.m_total;
    rec.m_per_step = p.m_per_step;
    rec.sigma = p.sigma;
    rec.gamma = p.gamma;
    rec.re_joint = relative_error(res.w_aug, truth);
    rec.re_x0 = relative_error(res.x0(), truth.head(n));
    rec.re_w = relative_error(res.w(), truth.tail(n));
    rec.mae_joint = mae(res.w_aug, truth);
    rec.mae_x0 = mae(res.x0(), truth.head(n));
    rec.mae_w = mae(res.w(), truth.tail(n));
    rec.mape_joint = mape(res.w_aug, truth);
    rec.mape_x0 = mape(res.x0(), truth.head(n));
    rec.mape_w = mape(res.w(), truth.tail(n));
    rec.c = h.bounds.c;
    rec.C = h.bounds.C;
    rec.nu = h.nu;
    rec.R = res.diagnostics.R;
    if (want_emp_delta && h.bounds.c > 0.0) {
      const Eigen::MatrixXd X = sampled_embedding_gram(basis, shift, k, plan, set);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X, Eigen::EigenvaluesOnly);
      rec.emp_delta = std::max(1.0 - es.eigenvalues().minCoeff() / h.bounds.c,
                               es.eigenvalues().maxCoeff() / h.bounds.C - 1.0);
    }
    rec.iterations = res.diagnostics.iterations;
    rec.converged = res.diagnostics.converged;
    rec.rank_deficient = res.diagnostics.rank_deficient;
    const auto t_end = std::chrono::steady_clock::now();
    rec.runtime_ms =
        strict ? 0.0 : std::chrono::duration<double, std::milli>(t_end - t_start).count();
    records[idx] = std::move(rec);
  });

  nlohmann::json manifest;
  manifest["kind"] = "synthetic";
  manifest["config"] = config_json(cfg);
  manifest["environment"] = environment_json();
  manifest["graph"] = {{"n", n},
                       {"edges", graph.edge_count()},
                       {"hash", graph.content_hash()},
                       {"source", cfg.get_str("graph.source", "generator")}};
  manifest["laplacian"] = cfg.get_str("laplacian", "normalized");
  manifest["alpha"] = alpha;
  manifest["k"] = k;
  manifest["regime"] = regime == Regime::Fixed ? "fixed" : "time-varying";
  manifest["delta"] = delta;
  manifest["eps"] = eps;
  nlohmann::json hs = nlohmann::json::array();
  for (const auto& [s, h] : horizons) {
    nlohmann::json hj;
    hj["s"] = s;
    hj["c"] = h.bounds.c;
    hj["C"] = h.bounds.C;
    hj["nu"] = h.nu;
    if (h.nu_per_t.size() > 0)
      hj["nu_per_t"] = std::vector<double>(h.nu_per_t.data(), h.nu_per_t.data() + h.nu_per_t.size());
    hj["min_m_per_step"] = h.min_m;
    hs.push_back(hj);
  }
  manifest["horizons"] = hs;
  manifest["seeds"] = {{"master", master_seed},
                       {"stream", "derived from (seed, global trial index)"}};
  manifest["trials_per_point"] = trials;
  manifest["points"] = points.size();
  manifest["strict"] = strict;

  ExperimentOutput out;
  out.records = std::move(records);
  out.manifest_json = manifest.dump(2);
  return out;
}

ExperimentOutput run_real(const Config& cfg) {
  const std::uint64_t master_seed = static_cast<std::uint64_t>(cfg.get_int("seed", 42));
  const int trials = static_cast<int>(cfg.get_int("trials", 100));
  const double sigma = cfg.get_double("sigma", 0.0);
  const bool strict = cfg.get_bool("strict", false);
  const int threads = static_cast<int>(cfg.get_int("threads", 1));
  const double delta = cfg.get_double("delta", 0.5);
  const double eps = cfg.get_double("eps", 0.1);

  const Eigen::MatrixXd series = load_series_csv(cfg.get_str("series"));
  const Eigen::MatrixX2d coords =
      load_coords_csv(cfg.has("coords") ? cfg.get_str("coords") : cfg.get_str("graph.coords"));
  if (coords.rows() != series.rows())
    fail(ErrorCode::InvalidArgument, "coordinate count does not match series rows");

  const Graph graph = build_knn_graph(coords, static_cast<int>(cfg.get_int("graph.knn_k", 10)));
  const int n = graph.n();
  const Eigen::SparseMatrix<double> L = laplacian_from_config(cfg, graph, true);
  const SpectralBasis basis = basis_for_config(cfg, graph, L, true);

  const int s0 = static_cast<int>(cfg.get_int("train_window", 10));
  const int s = static_cast<int>(cfg.get_int("s", 10));
  if (series.cols() < s0 + s)
    fail(ErrorCode::InvalidArgument, "series too short: need at least train_window + s snapshots");
  const Eigen::MatrixXd training = series.leftCols(s0);

  AlphaFit alpha_fit;
  const std::string alpha_cfg = cfg.get_str("alpha", "estimate");
  if (alpha_cfg == "estimate") {
    AlphaSearch search;
    search.lo = cfg.get_double("alpha_search.lo", 1e-3);
    search.hi = cfg.get_double("alpha_search.hi", 1e3);
    search.grid_points = static_cast<int>(cfg.get_int("alpha_search.grid_points", 61));
    search.refine_iters = static_cast<int>(cfg.get_int("alpha_search.refine_iters", 40));
    alpha_fit = estimate_alpha(training, basis, search);
  } else {
    alpha_fit.alpha = to_double(alpha_cfg, "alpha");
    alpha_fit.w = Eigen::VectorXd::Zero(n);
    alpha_fit.objective = std::numeric_limits<double>::quiet_NaN();
  }
  const ShiftSpectrum shift = shift_from_heat(basis, alpha_fit.alpha);

  const int k = cfg.has("k")
                    ? static_cast<int>(cfg.get_int("k"))
                    : bandwidth_for_energy(basis, training, cfg.get_double("energy_fraction", 0.9));
  if (k < 1 || k > n) fail(ErrorCode::InvalidArgument, "bandwidth k out of range for the graph");

  const Eigen::MatrixXd window = series.middleCols(s0, s);
  const std::vector<double> rates =
      cfg.get_double_list("rates", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});

  const StabilityBounds bounds = stability_bounds(shift.lambda, k, s);
  const SamplingPlan probe = SamplingPlan::uniform_per_step(Regime::TimeVarying, n, s, 1);
  Eigen::VectorXd nu_per_t(s);
  long long min_m = -1;
  for (int t = 0; t < s; ++t) {
    nu_per_t[t] = coherence_regime2(basis, shift, k, t, probe.p(t));
    if (bounds.c > 0.0) {
      const long long m = sample_complexity(nu_per_t[t], bounds.c, k, delta, eps);
      min_m = std::max(min_m, m);
    }
  }

  struct Job {
    std::size_t point;
    int trial;
    long long global;
  };
  std::vector<Job> jobs;
  long long global = 0;
  for (std::size_t p = 0; p < rates.size(); ++p)
    for (int trial = 0; trial < trials; ++trial) jobs.push_back({p, trial, global++});

  std::vector<TrialRecord> records(jobs.size());
  run_jobs(jobs.size(), threads, [&](std::size_t idx) {
    const Job& job = jobs[idx];
    const double rate = rates[job.point];
    const int m_per_step = std::max(1, static_cast<int>(std::lround(rate * n)));
    const auto t_start = std::chrono::steady_clock::now();

    Rng rng(master_seed, static_cast<std::uint64_t>(job.global));
    const AffineSystem sys(basis, shift, s);
    const SamplingPlan plan =
        SamplingPlan::uniform_per_step(Regime::TimeVarying, n, s, m_per_step, master_seed);
    const SampleSet set = draw_samples(plan, rng);
    const Measurements meas = measure(window, set, sigma, rng);
    const RecoveryResult res = recover_known_basis(meas, set, plan, sys, k);

    // Forward roll from the reconstruction, scored at unsampled points.
    const Eigen::MatrixXd pred = evolve(sys, res.x0(), res.w());
    std::vector<double> got, want;
    for (int t = 0; t < s; ++t) {
      std::vector<bool> sampled(n, false);
      for (int v : set.omega[t]) sampled[v] = true;
      for (int v = 0; v < n; ++v) {
        if (!sampled[v]) {
          got.push_back(pred(v, t));
          want.push_back(window(v, t));
        }
      }
    }

    TrialRecord rec;
    rec.trial = job.global;
    rec.seed = master_seed;
    rec.method = "least-squares";
    rec.regime = 2;
    rec.n = n;
    rec.k = k;
    rec.s = s;
    rec.m_total = static_cast<long long>(m_per_step) * s;
    rec.m_per_step = m_per_step;
    rec.sigma = sigma;
    rec.rate = rate;
    if (!got.empty()) {
      const Eigen::VectorXd gv = Eigen::Map<const Eigen::VectorXd>(got.data(), static_cast<Eigen::Index>(got.size()));
      const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(want.data(), static_cast<Eigen::Index>(want.size()));
      rec.mae_joint = mae(gv, wv);
      rec.mape_joint = mape(gv, wv);
      if (wv.norm() > 0.0) rec.re_joint = relative_error(gv, wv);
    }
    rec.c = bounds.c;
    rec.C = bounds.C;
    rec.nu = nu_per_t.maxCoeff();
    rec.R = res.diagnostics.R;
    rec.iterations = res.diagnostics.iterations;
    rec.converged = res.diagnostics.converged;
    rec.rank_deficient = res.diagnostics.rank_deficient;
    const auto t_end = std::chrono::steady_clock::now();
    rec.runtime_ms =
        strict ? 0.0 : std::chrono::duration<double, std::milli>(t_end - t_start).count();
    records[idx] = std::move(rec);
  });

  nlohmann::json manifest;
  manifest["kind"] = "real";
  manifest["config"] = config_json(cfg);
  manifest["environment"] = environment_json();
  manifest["graph"] = {{"n", n},
                       {"edges", graph.edge_count()},
                       {"hash", graph.content_hash()},
                       {"knn_k", cfg.get_int("graph.knn_k", 10)}};
  manifest["laplacian"] = cfg.get_str("laplacian", "combinatorial");
  manifest["alpha"] = alpha_fit.alpha;
  if (std::isfinite(alpha_fit.objective)) manifest["alpha_objective"] = alpha_fit.objective;
  manifest["k"] = k;
  manifest["train_window"] = s0;
  manifest["s"] = s;
  manifest["rates"] = rates;
  manifest["delta"] = delta;
  manifest["eps"] = eps;
  manifest["horizons"] = nlohmann::json::array({nlohmann::json{
      {"s", s},
      {"c", bounds.c},
      {"C", bounds.C},
      {"nu", nu_per_t.maxCoeff()},
      {"nu_per_t", std::vector<double>(nu_per_t.data(), nu_per_t.data() + nu_per_t.size())},
      {"min_m_per_step", min_m}}});
  manifest["seeds"] = {{"master", master_seed},
                       {"stream", "derived from (seed, global trial index)"}};
  manifest["trials_per_point"] = trials;
  manifest["points"] = rates.size();
  manifest["strict"] = strict;

  ExperimentOutput out;
  out.records = std::move(records);
  out.manifest_json = manifest.dump(2);
  return out;
}

std::vector<std::string> emit_results(const ExperimentOutput& out, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory: " + dir);

  std::vector<std::string> written;
  auto write_file = [&](const std::string& name, const std::string& content) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream f(path);
    if (!f) fail(ErrorCode::Io, "cannot write " + path);
    f << content;
    if (!f) fail(ErrorCode::Io, "write failed: " + path);
    written.push_back(path);
  };

  write_file("manifest.json", out.manifest_json + "\n");

  {
    std::ostringstream csv;
    csv << trial_csv_header() << '\n';
    for (const TrialRecord& rec : out.records) csv << trial_csv_row(rec) << '\n';
    write_file("trials.csv", csv.str());
  }

  {
    // Percentile summary per parameter point, groups in first-seen order.
    struct Group {
      std::string key_csv;
      std::vector<double> re;
    };
    std::vector<Group> groups;
    std::map<std::string, std::size_t> index;
    for (const TrialRecord& rec : out.records) {
      std::ostringstream key;
      key << rec.method << ',' << rec.regime << ',' << rec.n << ',' << rec.k << ',' << rec.s << ','
          << rec.m_total << ',' << rec.m_per_step << ',' << fmt(rec.sigma) << ',' << fmt(rec.gamma)
          << ',' << fmt(rec.rate);
      const auto [it, inserted] = index.emplace(key.str(), groups.size());
      if (inserted) groups.push_back({key.str(), {}});
      if (std::isfinite(rec.re_joint)) groups[it->second].re.push_back(rec.re_joint);
    }
    std::ostringstream csv;
    csv << "method,regime,n,k,s,m_total,m_per_step,sigma,gamma,rate,count,re_p25,re_p50,re_p75\n";
    for (const Group& g : groups) {
      csv << g.key_csv << ',' << g.re.size() << ',';
      if (g.re.empty())
        csv << "nan,nan,nan";
      else
        csv << fmt(percentile(g.re, 0.25)) << ',' << fmt(percentile(g.re, 0.50)) << ','
            << fmt(percentile(g.re, 0.75));
      csv << '\n';
    }
    write_file("summary.csv", csv.str());
  }

  // Success-probability heatmaps P(RE < 0.05) over (gamma, m_total), one file
  // per noise level, for the regularized sweeps.
  {
    std::vector<double> sigmas;
    for (const TrialRecord& rec : out.records) {
      if (rec.method != "regularized" || !std::isfinite(rec.gamma)) continue;
      if (std::find(sigmas.begin(), sigmas.end(), rec.sigma) == sigmas.end())
        sigmas.push_back(rec.sigma);
    }
    std::sort(sigmas.begin(), sigmas.end());
    for (double sigma : sigmas) {
      std::vector<double> gammas;
      std::vector<long long> ms;
      for (const TrialRecord& rec : out.records) {
        if (rec.method != "regularized" || rec.sigma != sigma) continue;
        if (std::find(gammas.begin(), gammas.end(), rec.gamma) == gammas.end())
          gammas.push_back(rec.gamma);
        if (std::find(ms.begin(), ms.end(), rec.m_total) == ms.end()) ms.push_back(rec.m_total);
      }
      std::sort(gammas.begin(), gammas.end());
      std::sort(ms.begin(), ms.end());
      if (gammas.empty() || ms.empty()) continue;
      Eigen::MatrixXd hits = Eigen::MatrixXd::Zero(gammas.size(), ms.size());
      Eigen::MatrixXd totals = Eigen::MatrixXd::Zero(gammas.size(), ms.size());
      for (const TrialRecord& rec : out.records) {
        if (rec.method != "regularized" || rec.sigma != sigma) continue;
        const auto gi = std::find(gammas.begin(), gammas.end(), rec.gamma) - gammas.begin();
        const auto mi = std::find(ms.begin(), ms.end(), rec.m_total) - ms.begin();
        totals(gi, mi) += 1.0;
        if (std::isfinite(rec.re_joint) && rec.re_joint < 0.05) hits(gi, mi) += 1.0;
      }
      std::ostringstream csv;
      csv << "gamma";
      for (long long m : ms) csv << ",M=" << m;
      csv << '\n';
      for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        csv << fmt(gammas[gi]);
        for (std::size_t mi = 0; mi < ms.size(); ++mi) {
          const double total = totals(gi, mi);
          csv << ',' << (total > 0.0 ? fmt(hits(gi, mi) / total) : "nan");
        }
        csv << '\n';
      }
      write_file("heatmap_sigma_" + fmt(sigma) + ".csv", csv.str());
    }
  }

  return written;
}

}  // namespace gds
