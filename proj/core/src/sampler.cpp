#include "rbfvmc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <Eigen/SparseCore>

#include "rbfvmc/errors.hpp"

namespace rbfvmc {

namespace {

// Draws below k with a modulo; the bias at k << 2^64 is far below the Monte
// Carlo noise floor and the result is identical on every platform, unlike
// std::uniform_int_distribution.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t k) {
  return rng() % k;
}

double draw_unit(std::mt19937_64& rng) {
  return (rng() >> 11) * 0x1.0p-53;
}

struct Tables {
  long size = 0;
  Eigen::VectorXd psi;
  Eigen::SparseMatrix<double, Eigen::RowMajor> h;
  std::vector<double> eloc;
  std::vector<char> eloc_ready;
  Eigen::MatrixXd o;
  std::vector<char> o_ready;
};

Tables build_tables(const RbfNetwork& net, const ModelSpec& model,
                    bool need_derivatives) {
  Tables t;
  t.size = basis_size(model);
  t.psi.resize(t.size);
  for (long i = 0; i < t.size; ++i) {
    t.psi[i] = evaluate(net, unflatten_index(model, i));
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (long i = 0; i < t.size; ++i) {
    for (const RowEntry& entry : connected_row(model, unflatten_index(model, i))) {
      triplets.emplace_back(i, flat_index(model, entry.to), entry.element);
    }
  }
  t.h.resize(t.size, t.size);
  t.h.setFromTriplets(triplets.begin(), triplets.end());
  t.eloc.assign(t.size, 0.0);
  t.eloc_ready.assign(t.size, 0);
  if (need_derivatives) {
    t.o.resize(net.parameter_count(), t.size);
    t.o_ready.assign(t.size, 0);
  }
  return t;
}

double eloc_at(Tables& t, long idx, double psi_floor) {
  if (!t.eloc_ready[idx]) {
    const double psi_n = t.psi[idx];
    if (std::abs(psi_n) < psi_floor) {
      throw DivisionHazardError("|psi(n)| is below the division floor");
    }
    double acc = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(t.h, idx);
         it; ++it) {
      acc += it.value() * t.psi[it.col()];
    }
    const double e = acc / psi_n;
    if (!std::isfinite(e)) throw NumericalError("local energy is not finite");
    t.eloc[idx] = e;
    t.eloc_ready[idx] = 1;
  }
  return t.eloc[idx];
}

void ensure_o(Tables& t, const RbfNetwork& net, const ModelSpec& model,
              long idx, double psi_floor) {
  if (!t.o_ready[idx]) {
    t.o.col(idx) = log_derivatives(net, unflatten_index(model, idx), psi_floor);
    t.o_ready[idx] = 1;
  }
}

struct ChainStats {
  std::vector<double> energies;
  long accepted = 0;
  long proposed = 0;
  Eigen::VectorXd o_sum;
  Eigen::VectorXd eo_sum;
  Eigen::MatrixXd oo_sum;
};

Configuration pick_start(const RbfNetwork& net, const ModelSpec& model,
                         const Tables* tables, std::mt19937_64& rng,
                         double psi_floor) {
  if (tables) {
    // Start each chain from the exact |psi|^2 distribution. Chains then land
    // in separate modes in proportion to their weight, so a multimodal state
    // is sampled without waiting for the walkers to cross the gaps between
    // modes.
    std::vector<double> cumulative(tables->size, 0.0);
    double total = 0.0;
    for (long i = 0; i < tables->size; ++i) {
      const double p = tables->psi[i];
      if (std::abs(p) >= psi_floor) total += p * p;
      cumulative[i] = total;
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw DivisionHazardError("no configuration has |psi| above the floor");
    }
    // upper_bound lands on an index with nonzero retained mass: a zero-mass
    // index shares its cumulative value with its predecessor, so the first
    // element above u cannot be one.
    const double u = draw_unit(rng) * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const long idx = it == cumulative.end()
                         ? tables->size - 1
                         : static_cast<long>(it - cumulative.begin());
    return unflatten_index(model, idx);
  }
  const auto upper = upper_bounds(model);
  Configuration best;
  double best_abs = -1.0;
  for (int probe = 0; probe < 64; ++probe) {
    Configuration n(upper.size());
    for (std::size_t j = 0; j < upper.size(); ++j) {
      n[j] = static_cast<int>(draw_below(rng, upper[j] + 1));
    }
    const double a = std::abs(evaluate(net, n));
    if (a > best_abs) {
      best_abs = a;
      best = std::move(n);
    }
  }
  if (best_abs < psi_floor) {
    throw DivisionHazardError("no probed configuration has |psi| above the floor");
  }
  return best;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void SamplerConfig::validate(int dim) const {
  if (dim < 1) throw ContractError("input dimension must be positive");
  if (n_samples < 1) throw ContractError("n_samples must be positive");
  if (n_chains < 1) throw ContractError("n_chains must be positive");
  if (n_therm < -1) throw ContractError("n_therm must be -1 or non-negative");
  if (stride != -1 && stride < 1) throw ContractError("stride must be -1 or positive");
  if (!(psi_floor > 0.0)) throw ContractError("psi_floor must be positive");
  if (tabulation_cap < 0) throw ContractError("tabulation_cap must be non-negative");
}

long SamplerConfig::therm_steps(int dim) const {
  return n_therm >= 0 ? n_therm : 1000L * dim;
}

long SamplerConfig::stride_steps(int dim) const {
  return stride >= 1 ? stride : dim;
}

Configuration propose_move(const Configuration& n, const std::vector<int>& upper,
                           std::mt19937_64& rng) {
  if (n.size() != upper.size() || n.empty()) {
    throw ContractError("configuration and bounds sizes disagree");
  }
  Configuration out = n;
  const std::size_t j = static_cast<std::size_t>(draw_below(rng, n.size()));
  const int step = (rng() & 1u) ? 1 : -1;
  int v = out[j] + step;
  if (v < 0) v = 0;
  if (v > upper[j]) v = upper[j];
  out[j] = v;
  return out;
}

bool metropolis_step(const RbfNetwork& net, const ModelSpec& model,
                     Configuration& n, std::mt19937_64& rng, double psi_floor) {
  const double psi_cur = evaluate(net, n);
  if (std::abs(psi_cur) < psi_floor) {
    throw DivisionHazardError("|psi(n)| is below the division floor");
  }
  Configuration cand = propose_move(n, upper_bounds(model), rng);
  const double psi_new = evaluate(net, cand);
  const double u = draw_unit(rng);
  // A candidate below the floor has acceptance under (floor/psi)^2, which
  // underflows to zero for any representable psi, so rejecting it outright
  // changes nothing and keeps later divisions safe.
  if (std::abs(psi_new) < psi_floor) return false;
  const double ratio = psi_new / psi_cur;
  if (u < ratio * ratio) {
    n = std::move(cand);
    return true;
  }
  return false;
}

double blocking_error(std::vector<double> series) {
  std::size_t n = series.size();
  if (n < 2) return 0.0;
  double worst = 0.0;
  while (n >= 2) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += series[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = series[i] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n - 1);
    worst = std::max(worst, std::sqrt(var / static_cast<double>(n)));
    if (n < 64) break;  // one more halving would leave fewer than 32 blocks
    const std::size_t m = n / 2;
    for (std::size_t i = 0; i < m; ++i) {
      series[i] = 0.5 * (series[2 * i] + series[2 * i + 1]);
    }
    n = m;
  }
  return worst;
}

SampleEstimates run_sampling(const RbfNetwork& net, const ModelSpec& model,
                             const SamplerConfig& cfg, bool need_derivatives) {
  net.validate();
  model.validate();
  const int dim = input_dim(model);
  cfg.validate(dim);
  if (net.input_dim != dim) {
    throw ContractError("network input dimension does not match the model");
  }
  if (need_derivatives && !is_differentiable(net.activation)) {
    throw ContractError("derivatives requested for a non-differentiable activation");
  }

  const auto upper = upper_bounds(model);
  const long size = basis_size(model);
  const bool tabulated = size <= cfg.tabulation_cap;
  Tables tables;
  if (tabulated) tables = build_tables(net, model, need_derivatives);

  const int params = net.parameter_count();
  const long therm = cfg.therm_steps(dim);
  const long stride = cfg.stride_steps(dim);

  std::vector<ChainStats> chains(cfg.n_chains);
  for (int c = 0; c < cfg.n_chains; ++c) {
    ChainStats& st = chains[c];
    const long quota = cfg.n_samples / cfg.n_chains +
                       (c < cfg.n_samples % cfg.n_chains ? 1 : 0);
    if (quota == 0) continue;
    st.energies.reserve(quota);
    if (need_derivatives) {
      st.o_sum = Eigen::VectorXd::Zero(params);
      st.eo_sum = Eigen::VectorXd::Zero(params);
      st.oo_sum = Eigen::MatrixXd::Zero(params, params);
    }

    std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(c)));
    Configuration n = pick_start(net, model, tabulated ? &tables : nullptr, rng,
                                 cfg.psi_floor);

    if (tabulated) {
      long idx = flat_index(model, n);
      std::vector<long> visits(need_derivatives ? tables.size : 0, 0);
      auto step = [&](bool count) {
        Configuration cand = propose_move(n, upper, rng);
        const long cand_idx = flat_index(model, cand);
        const double u = draw_unit(rng);
        if (count) ++st.proposed;
        if (std::abs(tables.psi[cand_idx]) < cfg.psi_floor) return;
        const double ratio = tables.psi[cand_idx] / tables.psi[idx];
        if (u < ratio * ratio) {
          n = std::move(cand);
          idx = cand_idx;
          if (count) ++st.accepted;
        }
      };
      for (long k = 0; k < therm; ++k) step(false);
      for (long s = 0; s < quota; ++s) {
        for (long k = 0; k < stride; ++k) step(true);
        st.energies.push_back(eloc_at(tables, idx, cfg.psi_floor));
        if (need_derivatives) {
          ensure_o(tables, net, model, idx, cfg.psi_floor);
          ++visits[idx];
        }
      }
      if (need_derivatives) {
        for (long i = 0; i < tables.size; ++i) {
          if (visits[i] == 0) continue;
          const double w = static_cast<double>(visits[i]);
          const auto col = tables.o.col(i);
          st.o_sum += w * col;
          st.eo_sum += w * tables.eloc[i] * col;
          st.oo_sum.selfadjointView<Eigen::Lower>().rankUpdate(col, w);
        }
      }
    } else {
      auto step = [&](bool count) {
        if (count) ++st.proposed;
        if (metropolis_step(net, model, n, rng, cfg.psi_floor) && count) {
          ++st.accepted;
        }
      };
      for (long k = 0; k < therm; ++k) step(false);
      for (long s = 0; s < quota; ++s) {
        for (long k = 0; k < stride; ++k) step(true);
        st.energies.push_back(local_energy(model, net, n, cfg.psi_floor));
        if (need_derivatives) {
          const Eigen::VectorXd o = log_derivatives(net, n, cfg.psi_floor);
          st.o_sum += o;
          st.eo_sum += st.energies.back() * o;
          st.oo_sum.selfadjointView<Eigen::Lower>().rankUpdate(o, 1.0);
        }
      }
    }
  }

  SampleEstimates est;
  est.n_samples = cfg.n_samples;
  double e_sum = 0.0;
  long accepted = 0;
  long proposed = 0;
  double err_sq = 0.0;
  if (need_derivatives) {
    est.o_mean = Eigen::VectorXd::Zero(params);
    est.eo_mean = Eigen::VectorXd::Zero(params);
    est.oo_mean = Eigen::MatrixXd::Zero(params, params);
  }
  std::vector<double> chain_means;
  chain_means.reserve(chains.size());
  for (ChainStats& st : chains) {
    if (st.energies.empty()) continue;
    double chain_sum = 0.0;
    for (double e : st.energies) chain_sum += e;
    e_sum += chain_sum;
    chain_means.push_back(chain_sum / static_cast<double>(st.energies.size()));
    accepted += st.accepted;
    proposed += st.proposed;
    const double weight =
        static_cast<double>(st.energies.size()) / static_cast<double>(cfg.n_samples);
    const double chain_err = blocking_error(std::move(st.energies));
    err_sq += weight * weight * chain_err * chain_err;
    if (need_derivatives) {
      est.o_mean += st.o_sum;
      est.eo_mean += st.eo_sum;
      est.oo_mean += st.oo_sum;
    }
  }
  est.e_mean = e_sum / static_cast<double>(cfg.n_samples);
  est.e_err = std::sqrt(err_sq);
  // Within-chain blocking cannot see chains that settled on different parts
  // of the distribution, and that disagreement is exactly the failure mode of
  // a multi-modal or heavy-tailed local energy. The chain level is the
  // coarsest block available, so the spread of per-chain means serves as a
  // second error estimate and the larger of the two is reported.
  if (chain_means.size() >= 2) {
    const double c = static_cast<double>(chain_means.size());
    double mu = 0.0;
    for (double x : chain_means) mu += x;
    mu /= c;
    double var = 0.0;
    for (double x : chain_means) var += (x - mu) * (x - mu);
    var /= c - 1.0;
    est.e_err = std::max(est.e_err, std::sqrt(var / c));
  }
  est.acceptance_rate =
      proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  est.mixing_warning = est.acceptance_rate < 1e-3;
  if (need_derivatives) {
    const double inv = 1.0 / static_cast<double>(cfg.n_samples);
    est.o_mean *= inv;
    est.eo_mean *= inv;
    est.oo_mean =
        Eigen::MatrixXd(est.oo_mean.selfadjointView<Eigen::Lower>()) * inv;
    if (!est.o_mean.allFinite() || !est.eo_mean.allFinite() ||
        !est.oo_mean.allFinite()) {
      throw NumericalError("derivative accumulators are not finite");
    }
  }
  if (!std::isfinite(est.e_mean) || !std::isfinite(est.e_err)) {
    throw NumericalError("energy accumulators are not finite");
  }
  return est;
}

}  // namespace rbfvmc
