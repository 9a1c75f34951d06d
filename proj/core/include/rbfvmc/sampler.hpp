#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rbfvmc/hamiltonian.hpp"
#include "rbfvmc/network.hpp"

namespace rbfvmc {

// Deterministic stream splitting for chain and iteration seeds.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

struct SamplerConfig {
  long n_samples = 50000;  // recorded samples, summed over chains
  long n_therm = -1;       // -1: one thousand sweeps
  long stride = -1;        // -1: one sweep (one proposal per coordinate)
  int n_chains = 1;
  std::uint64_t seed = 1;
  double psi_floor = kDefaultPsiFloor;
  // Bases up to this size get cached wavefunction and energy tables.
  // Set to 0 to force the streaming path.
  long tabulation_cap = 4096;

  void validate(int dim) const;
  long therm_steps(int dim) const;
  long stride_steps(int dim) const;
};

struct SampleEstimates {
  double e_mean = 0.0;
  double e_err = 0.0;
  double acceptance_rate = 0.0;
  long n_samples = 0;
  bool mixing_warning = false;
  // Filled only when derivatives were requested.
  Eigen::VectorXd o_mean;
  Eigen::VectorXd eo_mean;
  Eigen::MatrixXd oo_mean;
};

// Single-coordinate +-1 proposal with reflection at the range edges, so the
// proposal matrix stays symmetric. May propose the current configuration.
Configuration propose_move(const Configuration& n, const std::vector<int>& upper,
                           std::mt19937_64& rng);

// One Metropolis accept/reject step on |psi|^2. Mutates n on acceptance and
// returns whether the move was accepted.
bool metropolis_step(const RbfNetwork& net, const ModelSpec& model,
                     Configuration& n, std::mt19937_64& rng,
                     double psi_floor = kDefaultPsiFloor);

// Statistical error of a correlated series by iterated pair averaging,
// taking the worst level that still has at least 32 blocks.
double blocking_error(std::vector<double> series);

SampleEstimates run_sampling(const RbfNetwork& net, const ModelSpec& model,
                             const SamplerConfig& cfg, bool need_derivatives);

}  // namespace rbfvmc
