// Command-line front end; all work goes through the C API in gds_c.h.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gds_c.h"

namespace {

struct ConfigDeleter {
  void operator()(gds_config* cfg) const { gds_config_free(cfg); }
};
using ConfigPtr = std::unique_ptr<gds_config, ConfigDeleter>;

struct GlobalOpts {
  std::string config_path;
  std::string out;
  std::string seed;
  std::string threads;
  std::vector<std::string> overrides;  // key=value
};

ConfigPtr build_config(const GlobalOpts& opts) {
  gds_config* raw = nullptr;
  gds_status status;
  if (!opts.config_path.empty())
    status = gds_config_load(opts.config_path.c_str(), &raw);
  else
    status = gds_config_create(&raw);
  if (status != GDS_OK) {
    std::fprintf(stderr, "error: %s: %s\n", gds_status_name(status), gds_last_error());
    std::exit(static_cast<int>(status));
  }
  ConfigPtr cfg(raw);
  auto set = [&](const std::string& key, const std::string& value) {
    if (gds_config_set(cfg.get(), key.c_str(), value.c_str()) != GDS_OK) {
      std::fprintf(stderr, "error: cannot set %s\n", key.c_str());
      std::exit(1);
    }
  };
  for (const std::string& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      std::exit(1);
    }
    set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!opts.seed.empty()) set("seed", opts.seed);
  if (!opts.threads.empty()) set("threads", opts.threads);
  return cfg;
}

using CommandFn = gds_status (*)(const gds_config*, const char*, char**);

int run(CommandFn fn, const GlobalOpts& opts) {
  const ConfigPtr cfg = build_config(opts);
  char* summary = nullptr;
  const gds_status status = fn(cfg.get(), opts.out.c_str(), &summary);
  if (status != GDS_OK) {
    std::fprintf(stderr, "error: %s: %s\n", gds_status_name(status), gds_last_error());
    return static_cast<int>(status);
  }
  if (summary) {
    std::printf("%s\n", summary);
    gds_string_free(summary);
  }
  return 0;
}

void add_global_opts(CLI::App* app, GlobalOpts& opts) {
  app->add_option("--config", opts.config_path, "configuration file (flat key = value)");
  app->add_option("--out", opts.out, "output path or directory");
  app->add_option("--seed", opts.seed, "master seed override");
  app->add_option("--threads", opts.threads, "worker threads for trial sweeps");
  app->add_option("--set", opts.overrides, "config override key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time sampling and joint state/source recovery for bandlimited "
               "graph signal dynamics"};
  app.set_version_flag("--version", gds_version());
  app.require_subcommand(1);

  GlobalOpts opts;

  CLI::App* graph = app.add_subcommand("graph", "graph construction");
  graph->require_subcommand(1);
  CLI::App* graph_build = graph->add_subcommand("build", "build a graph and write its edge list");
  add_global_opts(graph_build, opts);

  CLI::App* simulate = app.add_subcommand("simulate", "simulate a trajectory to a series CSV");
  add_global_opts(simulate, opts);

  CLI::App* coherence = app.add_subcommand("coherence", "spectral weighted coherence report");
  add_global_opts(coherence, opts);

  CLI::App* complexity =
      app.add_subcommand("complexity", "sample counts from the isometry guarantee");
  add_global_opts(complexity, opts);

  CLI::App* recover = app.add_subcommand("recover", "single simulate-sample-reconstruct run");
  add_global_opts(recover, opts);

  CLI::App* rip = app.add_subcommand("rip-check", "empirical isometry check of sampled drawings");
  add_global_opts(rip, opts);

  CLI::App* experiment = app.add_subcommand("experiment", "trial sweeps");
  experiment->require_subcommand(1);
  CLI::App* synthetic = experiment->add_subcommand("synthetic", "generated-data sweep");
  add_global_opts(synthetic, opts);
  CLI::App* real = experiment->add_subcommand("real", "real-series sweep");
  add_global_opts(real, opts);

  CLI11_PARSE(app, argc, argv);

  if (graph_build->parsed()) return run(&gds_cmd_graph_build, opts);
  if (simulate->parsed()) return run(&gds_cmd_simulate, opts);
  if (coherence->parsed()) return run(&gds_cmd_coherence, opts);
  if (complexity->parsed()) return run(&gds_cmd_complexity, opts);
  if (recover->parsed()) return run(&gds_cmd_recover, opts);
  if (rip->parsed()) return run(&gds_cmd_rip_check, opts);
  if (synthetic->parsed()) return run(&gds_cmd_experiment_synthetic, opts);
  if (real->parsed()) return run(&gds_cmd_experiment_real, opts);
  return 1;
}
