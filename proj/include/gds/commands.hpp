#pragma once

#include <string>

#include "gds/experiments.hpp"

namespace gds::cmd {

/// Config-driven operations backing the CLI subcommands. Each writes its
/// artifacts (when an output path is given) and returns a JSON summary.
std::string graph_build(const Config& cfg, const std::string& out_path);
std::string simulate(const Config& cfg, const std::string& out_path);
std::string coherence(const Config& cfg, const std::string& out_path);
std::string complexity(const Config& cfg, const std::string& out_path);
std::string recover(const Config& cfg, const std::string& out_path);
std::string rip_check(const Config& cfg, const std::string& out_path);
std::string experiment_synthetic(const Config& cfg, const std::string& out_dir);
std::string experiment_real(const Config& cfg, const std::string& out_dir);

}  // namespace gds::cmd
