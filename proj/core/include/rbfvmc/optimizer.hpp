#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rbfvmc/hamiltonian.hpp"
#include "rbfvmc/network.hpp"
#include "rbfvmc/sampler.hpp"

namespace rbfvmc {

// A solve counts as failed when ||S'x - F|| exceeds this times max(1, ||F||).
inline constexpr double kSrResidualTol = 1e-8;

// Trust region in the sampled metric: when alpha * sqrt(x' S' x) exceeds
// this bound, the update is rescaled to this length instead of being applied
// whole. The quantity is the rms relative change of the amplitudes, so 1
// means a full rewrite of the state in one move. Settled phases sit orders
// of magnitude below; capping only shortens the rare aggressive moves, which
// otherwise can throw a nearly converged state onto a few-point support from
// which the sampled gradient cannot recover.
inline constexpr double kSrStepCap = 1.0;

// Force norms below this are indistinguishable from accumulator rounding
// noise (a frozen or exactly converged chain); the iteration records its
// estimates and leaves the parameters alone.
inline constexpr double kSrForceFloor = 1e-6;

struct SrConfig {
  double alpha = 0.01;
  int max_iter = 300;
  double reg_init = 100.0;
  double reg_decay = 0.9;
  double reg_floor = 1e-4;
  double pivot_tol = 1e-12;
  // Tail window for the reported energy and for early stopping.
  int convergence_window = 50;
  double convergence_tol = 0.0;  // 0 disables early stopping

  void validate() const;
};

// Diagonal boost r(k) = max(reg_init * reg_decay^k, reg_floor).
double regularization(int iteration, const SrConfig& cfg);

struct SrSystem {
  Eigen::MatrixXd s;  // covariance of the log derivatives
  Eigen::VectorXd f;  // covariance of local energy with the log derivatives
};

SrSystem build_sr(const SampleEstimates& est);

struct SrSolution {
  Eigen::VectorXd delta;  // alpha * S'^-1 F, to be subtracted from the parameters
  bool fallback = false;  // rank-deficient, solved in the least-squares sense
  double residual = 0.0;  // ||S'x - F||
  double step = 0.0;      // alpha * sqrt(x' S' x), metric length of the move
};

SrSolution solve_update(const SrSystem& sys, double r_k, double alpha,
                        double pivot_tol);

struct IterationRow {
  int iter = 0;
  double energy = 0.0;
  double error = 0.0;
  double acceptance = 0.0;
  double r_k = 0.0;
  bool flagged = false;  // update needed a retry, a fallback, or was skipped
};

struct RunRecord {
  std::vector<IterationRow> rows;
  bool converged = false;
  bool aborted = false;
  std::string abort_reason;
  RbfNetwork best_net;    // parameters with the lowest energy + error score
  double best_energy = 0.0;
  double best_error = 0.0;
  RbfNetwork last_net;
  double final_energy = 0.0;  // mean over the tail window
  double final_error = 0.0;
};

RunRecord optimize(const RbfNetwork& start, const ModelSpec& model,
                   const SamplerConfig& sampler_cfg, const SrConfig& sr_cfg);

}  // namespace rbfvmc
