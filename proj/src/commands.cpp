#include "gds/commands.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>

#include "gds/dynamics.hpp"
#include "gds/error.hpp"
#include "gds/metrics.hpp"
#include "gds/sampling.hpp"
#include "json.hpp"

namespace gds::cmd {

namespace {

using nlohmann::json;

Regime parse_regime(const Config& cfg) {
  const std::string v = cfg.get_str("regime", "time-varying");
  if (v == "1" || v == "fixed") return Regime::Fixed;
  if (v == "2" || v == "time-varying") return Regime::TimeVarying;
  fail(ErrorCode::Parse, "unknown regime '" + v + "' (use fixed or time-varying)");
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out << content;
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

struct SystemBundle {
  Graph graph;
  Eigen::SparseMatrix<double> L;
  SpectralBasis basis;
  ShiftSpectrum shift;
};

SystemBundle make_system(const Config& cfg) {
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 42));
  Graph graph = build_graph_from_config(cfg, seed);
  Eigen::SparseMatrix<double> L = laplacian_from_config(cfg, graph, false);
  SpectralBasis basis = basis_for_config(cfg, graph, L, false);
  ShiftSpectrum shift = shift_from_heat(basis, cfg.get_double("alpha", 30.0));
  return SystemBundle{std::move(graph), std::move(L), std::move(basis), std::move(shift)};
}

SamplingPlan plan_from_config(const Config& cfg, Regime regime, int n, int s,
                              std::uint64_t seed) {
  if (cfg.has("m_t"))
    return SamplingPlan::uniform_per_step(regime, n, s, static_cast<int>(cfg.get_int("m_t")), seed);
  return SamplingPlan::uniform_total(regime, n, s, cfg.get_int("M", 40), seed);
}

}  // namespace

std::string graph_build(const Config& cfg, const std::string& out_path) {
  const Graph graph = build_graph_from_config(cfg, static_cast<std::uint64_t>(cfg.get_int("seed", 42)));
  if (!out_path.empty()) save_edge_list(graph, out_path);
  json j;
  j["n"] = graph.n();
  j["edges"] = graph.edge_count();
  j["hash"] = graph.content_hash();
  j["mean_degree"] = graph.degrees().mean();
  if (!out_path.empty()) j["out"] = out_path;
  return j.dump(2);
}

std::string simulate(const Config& cfg, const std::string& out_path) {
  if (out_path.empty()) fail(ErrorCode::InvalidArgument, "simulate requires an output path");
  const SystemBundle sys = make_system(cfg);
  const int n = sys.graph.n();
  const int k = static_cast<int>(cfg.get_int("k", 5));
  const int s = static_cast<int>(cfg.get_int("s", 10));
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 42));

  Rng rng(seed, 0);
  const Eigen::VectorXd x0 = random_bandlimited(sys.basis, k, rng);
  const Eigen::VectorXd w = random_bandlimited(sys.basis, k, rng);
  const AffineSystem affine(sys.basis, sys.shift, s);
  const Eigen::MatrixXd traj = evolve(affine, x0, w);
  save_series_csv(traj, out_path);

  json meta;
  meta["alpha"] = sys.shift.alpha;
  meta["k"] = k;
  meta["s"] = s;
  meta["seed"] = seed;
  meta["graph"] = {{"n", n}, {"hash", sys.graph.content_hash()}};
  meta["x0"] = to_vec(x0);
  meta["w"] = to_vec(w);
  const std::string meta_path = out_path + ".meta.json";
  write_text(meta_path, meta.dump(2) + "\n");

  json j;
  j["out"] = out_path;
  j["meta"] = meta_path;
  j["n"] = n;
  j["s"] = s;
  j["k"] = k;
  return j.dump(2);
}

std::string coherence(const Config& cfg, const std::string& out_path) {
  const SystemBundle sys = make_system(cfg);
  const int k = static_cast<int>(cfg.get_int("k", 5));
  const int s = static_cast<int>(cfg.get_int("s", 10));
  const Regime regime = parse_regime(cfg);
  const SamplingPlan plan = SamplingPlan::uniform_per_step(regime, sys.graph.n(), s, 1);
  const CoherenceReport report = coherence_report(sys.basis, sys.shift, k, plan);
  const StabilityBounds bounds = stability_bounds(sys.shift.lambda, k, s);

  json j;
  j["k"] = k;
  j["s"] = s;
  j["regime"] = regime == Regime::Fixed ? "fixed" : "time-varying";
  j["c"] = bounds.c;
  j["C"] = bounds.C;
  if (report.regime1) j["nu_fixed"] = *report.regime1;
  j["nu_per_t"] = to_vec(report.regime2);
  j["nu_upper_bound_per_t"] = to_vec(report.upper_bound);
  const std::string text = j.dump(2);
  if (!out_path.empty()) write_text(out_path, text + "\n");
  return text;
}

std::string complexity(const Config& cfg, const std::string& out_path) {
  const double delta = cfg.get_double("delta", 0.5);
  const double eps = cfg.get_double("eps", 0.1);
  json j;
  j["delta"] = delta;
  j["eps"] = eps;

  if (cfg.has("nu") && cfg.has("c")) {
    const int k = static_cast<int>(cfg.get_int("k"));
    const long long m = sample_complexity(cfg.get_double("nu"), cfg.get_double("c"), k, delta, eps);
    j["k"] = k;
    j["nu"] = cfg.get_double("nu");
    j["c"] = cfg.get_double("c");
    j["m"] = m;
  } else {
    const SystemBundle sys = make_system(cfg);
    const int k = static_cast<int>(cfg.get_int("k", 5));
    const int s = static_cast<int>(cfg.get_int("s", 10));
    const Regime regime = parse_regime(cfg);
    const StabilityBounds bounds = stability_bounds(sys.shift.lambda, k, s);
    if (!(bounds.c > 0.0))
      fail(ErrorCode::InvalidArgument, "degenerate horizon: lower stability constant is zero");
    const SamplingPlan plan = SamplingPlan::uniform_per_step(regime, sys.graph.n(), s, 1);
    j["k"] = k;
    j["s"] = s;
    j["c"] = bounds.c;
    j["C"] = bounds.C;
    j["regime"] = regime == Regime::Fixed ? "fixed" : "time-varying";
    if (regime == Regime::Fixed) {
      const double nu = coherence_regime1(sys.basis, sys.shift, k, s, plan.p(0));
      const long long m = sample_complexity(nu, bounds.c, k, delta, eps);
      j["nu"] = nu;
      j["m_per_step"] = m;
      j["m_total"] = m * s;
    } else {
      std::vector<double> nus(s);
      std::vector<long long> ms(s);
      long long worst = 0, total = 0;
      for (int t = 0; t < s; ++t) {
        nus[t] = coherence_regime2(sys.basis, sys.shift, k, t, plan.p(t));
        ms[t] = sample_complexity(nus[t], bounds.c, k, delta, eps);
        worst = std::max(worst, ms[t]);
        total += ms[t];
      }
      j["nu_per_t"] = nus;
      j["m_per_t"] = ms;
      j["m_per_step"] = worst;
      j["m_total"] = total;
    }
  }
  const std::string text = j.dump(2);
  if (!out_path.empty()) write_text(out_path, text + "\n");
  return text;
}

std::string recover(const Config& cfg, const std::string& out_path) {
  const SystemBundle sys = make_system(cfg);
  const int n = sys.graph.n();
  const int k = static_cast<int>(cfg.get_int("k", 5));
  const int s = static_cast<int>(cfg.get_int("s", 10));
  const double sigma = cfg.get_double("sigma", 0.0);
  const double eps = cfg.get_double("eps", 0.1);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 42));
  const Regime regime = parse_regime(cfg);
  const std::string method = cfg.get_str("method", "least-squares");

  Rng rng(seed, 0);
  Eigen::VectorXd truth(2 * n);
  truth.head(n) = random_bandlimited(sys.basis, k, rng);
  truth.tail(n) = random_bandlimited(sys.basis, k, rng);
  const AffineSystem affine(sys.basis, sys.shift, s);
  const Eigen::MatrixXd traj = evolve(affine, truth.head(n), truth.tail(n));
  const SamplingPlan plan = plan_from_config(cfg, regime, n, s, seed);
  const SampleSet set = draw_samples(plan, rng);
  const Measurements meas = measure(traj, set, sigma, rng);

  // With no configured delta the sample count was sized externally; invert
  // the complexity formula at the actual per-step count.
  std::string delta_source = "config";
  double delta = cfg.get_double("delta", 0.0);
  if (!cfg.has("delta")) {
    delta_source = "back-solved";
    const StabilityBounds bounds = stability_bounds(sys.shift.lambda, k, s);
    const SamplingPlan probe = SamplingPlan::uniform_per_step(regime, n, s, 1);
    double worst = 0.0;
    if (regime == Regime::Fixed) {
      worst = coherence_regime1(sys.basis, sys.shift, k, s, probe.p(0)) / plan.count(0);
    } else {
      for (int t = 0; t < s; ++t)
        worst = std::max(
            worst, coherence_regime2(sys.basis, sys.shift, k, t, probe.p(t)) / plan.count(t));
    }
    delta = std::sqrt(3.0 * worst / bounds.c * std::log(4.0 * k / eps));
    delta = std::min(std::max(delta, 1e-6), 1.0 - 1e-6);
  }

  RecoveryResult res;
  RegularizerPoly g = RegularizerPoly::monomial(static_cast<int>(cfg.get_int("g.degree", 4)));
  double gamma = std::numeric_limits<double>::quiet_NaN();
  if (method == "regularized") {
    gamma = cfg.get_double("gamma");
    SolverOptions opts;
    opts.tol = cfg.get_double("solver.tol", 1e-10);
    opts.max_iters = static_cast<int>(cfg.get_int("solver.max_iters", -1));
    const Eigen::MatrixXd A = materialize_operator(sys.basis, sys.shift);
    res = recover_regularized(meas, set, plan,
                              [&A](const Eigen::VectorXd& x) { return A * x; }, sys.L, g, gamma,
                              s, opts);
  } else if (method == "least-squares") {
    res = recover_known_basis(meas, set, plan, affine, k);
  } else {
    fail(ErrorCode::Parse, "unknown method '" + method + "'");
  }
  res.diagnostics.delta = delta;

  const BoundReport bounds_report =
      check_error_bounds(res, truth, meas, set, plan, affine, k, delta,
                         method == "regularized" ? &g : nullptr, gamma);

  if (!out_path.empty()) {
    write_text(out_path, res.to_json() + "\n");
    if (cfg.get_bool("save_samples", false))
      write_text(out_path + ".samples.json", samples_to_json(set, meas, seed) + "\n");
  }

  json j;
  j["method"] = method;
  j["delta"] = delta;
  j["delta_source"] = delta_source;
  j["re_joint"] = relative_error(res.w_aug, truth);
  j["re_x0"] = relative_error(res.x0(), truth.head(n));
  j["re_w"] = relative_error(res.w(), truth.tail(n));
  j["residual"] = res.residual;
  j["iterations"] = res.diagnostics.iterations;
  j["converged"] = res.diagnostics.converged;
  j["rank_deficient"] = res.diagnostics.rank_deficient;
  j["bounds"] = json::parse(bounds_report.to_json());
  if (!out_path.empty()) j["out"] = out_path;
  return j.dump(2);
}

std::string rip_check(const Config& cfg, const std::string& out_path) {
  const SystemBundle sys = make_system(cfg);
  const int n = sys.graph.n();
  const int k = static_cast<int>(cfg.get_int("k", 5));
  const int s = static_cast<int>(cfg.get_int("s", 10));
  const double delta = cfg.get_double("delta", 0.5);
  const double eps = cfg.get_double("eps", 0.1);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 42));
  const Regime regime = parse_regime(cfg);
  const int num_seeds = static_cast<int>(cfg.get_int("rip.seeds", 1));
  const int probes = static_cast<int>(cfg.get_int("rip.probes", 50));

  const AffineSystem affine(sys.basis, sys.shift, s);
  const StabilityBounds bounds = stability_bounds(sys.shift.lambda, k, s);

  // Without an explicit size the draw counts come from the complexity bound.
  SamplingPlan plan = [&]() {
    if (cfg.has("m_t") || cfg.has("M")) return plan_from_config(cfg, regime, n, s, seed);
    if (!(bounds.c > 0.0))
      fail(ErrorCode::InvalidArgument, "degenerate horizon: lower stability constant is zero");
    const SamplingPlan probe = SamplingPlan::uniform_per_step(regime, n, s, 1);
    long long m = 0;
    if (regime == Regime::Fixed) {
      m = sample_complexity(coherence_regime1(sys.basis, sys.shift, k, s, probe.p(0)), bounds.c, k,
                            delta, eps);
    } else {
      for (int t = 0; t < s; ++t)
        m = std::max(m, sample_complexity(
                            coherence_regime2(sys.basis, sys.shift, k, t, probe.p(t)), bounds.c,
                            k, delta, eps));
    }
    return SamplingPlan::uniform_per_step(regime, n, s, static_cast<int>(m), seed);
  }();

  json per_seed = json::array();
  int passed = 0;
  for (int i = 0; i < num_seeds; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    const SampleSet set = draw_samples(plan, rng);
    const RipReport report = gds::rip_check(affine, k, plan, set, probes, rng);
    const bool ok = report.passes(delta);
    passed += ok ? 1 : 0;
    per_seed.push_back({{"seed_index", i},
                        {"ratio_min", report.ratio_min},
                        {"ratio_max", report.ratio_max},
                        {"probe_min", report.probe_min},
                        {"probe_max", report.probe_max},
                        {"delta_lower", report.delta_lower},
                        {"delta_upper", report.delta_upper},
                        {"pass", ok}});
  }

  json j;
  j["k"] = k;
  j["s"] = s;
  j["regime"] = regime == Regime::Fixed ? "fixed" : "time-varying";
  j["m_per_step"] = plan.count(0);
  j["delta"] = delta;
  j["eps"] = eps;
  j["c"] = bounds.c;
  j["C"] = bounds.C;
  j["seeds"] = num_seeds;
  j["passed"] = passed;
  j["pass_rate"] = static_cast<double>(passed) / num_seeds;
  j["per_seed"] = per_seed;
  const std::string text = j.dump(2);
  if (!out_path.empty()) write_text(out_path, text + "\n");
  return text;
}

std::string experiment_synthetic(const Config& cfg, const std::string& out_dir) {
  if (out_dir.empty()) fail(ErrorCode::InvalidArgument, "experiment requires an output directory");
  const ExperimentOutput out = run_synthetic(cfg);
  const std::vector<std::string> files = emit_results(out, out_dir);
  json j;
  j["records"] = out.records.size();
  j["files"] = files;
  return j.dump(2);
}

std::string experiment_real(const Config& cfg, const std::string& out_dir) {
  if (out_dir.empty()) fail(ErrorCode::InvalidArgument, "experiment requires an output directory");
  const ExperimentOutput out = run_real(cfg);
  const std::vector<std::string> files = emit_results(out, out_dir);
  json j;
  j["records"] = out.records.size();
  j["files"] = files;
  return j.dump(2);
}

}  // namespace gds::cmd
