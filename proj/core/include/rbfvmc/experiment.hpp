#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rbfvmc/hamiltonian.hpp"
#include "rbfvmc/network.hpp"
#include "rbfvmc/optimizer.hpp"
#include "rbfvmc/sampler.hpp"

namespace rbfvmc {

// Environment variable that, when set, overrides the configured output
// directory.
inline constexpr const char* kOutputDirEnvVar = "RBFVMC_OUT_DIR";

struct ExperimentConfig {
  ModelSpec model;
  int hidden_count = 10;
  ActivationKind activation = ActivationKind::Gaussian;
  double init_scale = 1.0;
  SamplerConfig sampler;
  SrConfig sr;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
};

// Flat "section.key = value" format with '#' comments. Unknown or duplicate
// keys are rejected.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::filesystem::path& path);

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

struct ExperimentResult {
  RunRecord record;
  std::filesystem::path out_dir;
  // Dense-diagonalization value for the same truncated model, when the basis
  // is small enough to assemble.
  std::optional<double> reference_energy;
};

// Optimizes from a seeded random start and writes record.csv, network.txt and
// summary.txt into the output directory. Artifacts are written even when the
// run aborts early.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Same, but with an explicit artifact directory (no environment override).
ExperimentResult run_experiment_to(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out_dir);

void write_network(const RbfNetwork& net, const std::filesystem::path& path);
RbfNetwork read_network(const std::filesystem::path& path);

}  // namespace rbfvmc
