#include "rbfvmc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rbfvmc/errors.hpp"

namespace rbfvmc {

void SrConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ContractError("alpha must be positive and finite");
  }
  if (max_iter < 1) throw ContractError("max_iter must be positive");
  if (!(reg_init > 0.0)) throw ContractError("reg_init must be positive");
  if (!(reg_decay > 0.0) || reg_decay > 1.0) {
    throw ContractError("reg_decay must lie in (0, 1]");
  }
  if (!(reg_floor > 0.0)) throw ContractError("reg_floor must be positive");
  if (!(pivot_tol > 0.0)) throw ContractError("pivot_tol must be positive");
  if (convergence_window < 1) throw ContractError("convergence_window must be positive");
  if (convergence_tol < 0.0) throw ContractError("convergence_tol must be non-negative");
}

double regularization(int iteration, const SrConfig& cfg) {
  if (iteration < 0) throw ContractError("iteration must be non-negative");
  return std::max(cfg.reg_init * std::pow(cfg.reg_decay, iteration), cfg.reg_floor);
}

SrSystem build_sr(const SampleEstimates& est) {
  if (est.o_mean.size() == 0) {
    throw ContractError("estimates carry no derivative moments");
  }
  SrSystem sys;
  sys.s = est.oo_mean - est.o_mean * est.o_mean.transpose();
  sys.f = est.eo_mean - est.e_mean * est.o_mean;
  return sys;
}

SrSolution solve_update(const SrSystem& sys, double r_k, double alpha,
                        double pivot_tol) {
  const Eigen::Index n = sys.s.rows();
  if (sys.s.cols() != n || sys.f.size() != n) {
    throw ContractError("SR system shapes disagree");
  }
  if (!(r_k >= 0.0)) throw ContractError("r_k must be non-negative");

  // A parameter whose log-derivative never varied over the samples gives an
  // all-zero row and column, zero diagonal included, and by the covariance
  // identity its force component is zero as well. Multiplying a zero
  // diagonal by (1 + r) cannot make it solvable, so those coordinates are
  // held fixed and the rest is solved in Jacobi-scaled form, where the
  // system becomes corr(S) + r*I: positive definite with eigenvalues >= r.
  const Eigen::VectorXd diag = sys.s.diagonal();
  const double max_diag = n > 0 ? diag.maxCoeff() : 0.0;
  SrSolution sol;
  sol.delta = Eigen::VectorXd::Zero(n);
  if (!(max_diag > 0.0)) {
    sol.residual = sys.f.norm();
    sol.fallback = sol.residual > 0.0;
    return sol;
  }

  std::vector<Eigen::Index> live;
  live.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (diag[i] > max_diag * 1e-28) live.push_back(i);
  }
  const Eigen::Index m = static_cast<Eigen::Index>(live.size());
  Eigen::VectorXd scale(m);
  for (Eigen::Index a = 0; a < m; ++a) scale[a] = std::sqrt(diag[live[a]]);
  Eigen::MatrixXd scaled(m, m);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      scaled(a, b) = sys.s(live[a], live[b]) / (scale[a] * scale[b]);
    }
    scaled(a, a) = 1.0 + r_k;
    rhs[a] = sys.f[live[a]] / scale[a];
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(scaled);
  lu.setThreshold(pivot_tol);
  Eigen::VectorXd y;
  if (lu.rank() == m) {
    y = lu.solve(rhs);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(scaled);
    cod.setThreshold(pivot_tol);
    y = cod.solve(rhs);
    sol.fallback = true;
  }
  if (!y.allFinite()) {
    sol.residual = std::numeric_limits<double>::infinity();
    return sol;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index a = 0; a < m; ++a) x[live[a]] = y[a] / scale[a];
  Eigen::MatrixXd s_reg = sys.s;
  s_reg.diagonal() *= 1.0 + r_k;
  const Eigen::VectorXd sx = s_reg * x;
  sol.residual = (sx - sys.f).norm();
  sol.step = alpha * std::sqrt(std::max(0.0, x.dot(sx)));
  sol.delta = alpha * x;
  return sol;
}

namespace {

double window_mean(const std::vector<IterationRow>& rows, std::size_t begin,
                   std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += rows[i].energy;
  return acc / static_cast<double>(end - begin);
}

}  // namespace

RunRecord optimize(const RbfNetwork& start, const ModelSpec& model,
                   const SamplerConfig& sampler_cfg, const SrConfig& sr_cfg) {
  start.validate();
  model.validate();
  sr_cfg.validate();
  sampler_cfg.validate(input_dim(model));
  if (!is_differentiable(start.activation)) {
    throw ContractError("optimization needs a differentiable activation");
  }

  RunRecord rec;
  rec.best_net = start;
  rec.last_net = start;
  rec.best_energy = std::numeric_limits<double>::infinity();
  rec.best_error = 0.0;
  double best_score = std::numeric_limits<double>::infinity();

  RbfNetwork net = start;
  Eigen::VectorXd params = net.flatten();
  int consecutive_failures = 0;

  for (int k = 0; k < sr_cfg.max_iter; ++k) {
    SamplerConfig iter_cfg = sampler_cfg;
    iter_cfg.seed = mix_seed(sampler_cfg.seed, static_cast<std::uint64_t>(k) + 0x10001);

    SampleEstimates est;
    try {
      est = run_sampling(net, model, iter_cfg, true);
    } catch (const NumericalError& e) {
      rec.aborted = true;
      rec.abort_reason = std::string("sampling failed at iteration ") +
                         std::to_string(k) + ": " + e.what();
      break;
    }

    const double r_k = regularization(k, sr_cfg);
    IterationRow row;
    row.iter = k;
    row.energy = est.e_mean;
    row.error = est.e_err;
    row.acceptance = est.acceptance_rate;
    row.r_k = r_k;

    const double score = est.e_mean + est.e_err;
    if (!est.mixing_warning && score < best_score) {
      best_score = score;
      rec.best_net = net;
      rec.best_energy = est.e_mean;
      rec.best_error = est.e_err;
    }

    if (est.mixing_warning) {
      // The chain barely moved; covariances from it would steer blindly.
      row.flagged = true;
      rec.rows.push_back(row);
      consecutive_failures = 0;
      continue;
    }

    const SrSystem sys = build_sr(est);
    const double f_norm = sys.f.norm();
    if (f_norm < kSrForceFloor) {
      // Stationary at sampling precision: either converged or frozen.
      rec.rows.push_back(row);
      consecutive_failures = 0;
      continue;
    }
    const double f_scale = std::max(1.0, f_norm);
    bool applied = false;
    for (int attempt = 0; attempt <= 3; ++attempt) {
      const double boosted = r_k * std::pow(10.0, attempt);
      SrSolution sol = solve_update(sys, boosted, sr_cfg.alpha, sr_cfg.pivot_tol);
      if (attempt > 0 || sol.fallback) row.flagged = true;
      if (sol.residual > kSrResidualTol * f_scale || !sol.delta.allFinite()) {
        continue;
      }
      if (sol.step > kSrStepCap) {
        sol.delta *= kSrStepCap / sol.step;
        row.flagged = true;
      }
      const Eigen::VectorXd updated = params - sol.delta;
      if (!updated.allFinite()) {
        row.flagged = true;
        continue;
      }
      params = updated;
      net.unflatten(params);
      applied = true;
      break;
    }
    if (applied) {
      consecutive_failures = 0;
    } else {
      row.flagged = true;
      ++consecutive_failures;
    }
    rec.rows.push_back(row);
    if (consecutive_failures >= 3) {
      rec.aborted = true;
      rec.abort_reason = "three consecutive iterations could not produce a usable update";
      break;
    }

    const std::size_t w = static_cast<std::size_t>(sr_cfg.convergence_window);
    if (sr_cfg.convergence_tol > 0.0 && rec.rows.size() >= 2 * w) {
      const std::size_t end = rec.rows.size();
      const double recent = window_mean(rec.rows, end - w, end);
      const double previous = window_mean(rec.rows, end - 2 * w, end - w);
      if (std::abs(recent - previous) < sr_cfg.convergence_tol) {
        rec.converged = true;
      }
    }
    if (rec.converged) break;
  }

  rec.last_net = net;
  if (!rec.rows.empty()) {
    const std::size_t w = std::min<std::size_t>(
        static_cast<std::size_t>(sr_cfg.convergence_window), rec.rows.size());
    const std::size_t end = rec.rows.size();
    const std::size_t begin = end - w;
    const double mean = window_mean(rec.rows, begin, end);
    double scatter = 0.0;
    double combined_sq = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double d = rec.rows[i].energy - mean;
      scatter += d * d;
      combined_sq += rec.rows[i].error * rec.rows[i].error;
    }
    const double sem =
        w > 1 ? std::sqrt(scatter / static_cast<double>((w - 1) * w)) : rec.rows.back().error;
    const double combined = std::sqrt(combined_sq) / static_cast<double>(w);
    rec.final_energy = mean;
    rec.final_error = std::max(sem, combined);
  }
  if (rec.rows.empty() && !rec.aborted) {
    throw OptimizerError("no iterations were recorded");
  }
  return rec;
}

}  // namespace rbfvmc
