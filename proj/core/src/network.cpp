#include "rbfvmc/network.hpp"

#include <cmath>
#include <random>
#include <string>

#include "rbfvmc/errors.hpp"

namespace rbfvmc {

bool is_differentiable(ActivationKind kind) {
  return kind == ActivationKind::Gaussian || kind == ActivationKind::ExpAbs;
}

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Gaussian:
      return "gaussian";
    case ActivationKind::ExpAbs:
      return "exp-abs";
    case ActivationKind::Multiquadric:
      return "multiquadric";
    case ActivationKind::InverseMultiquadric:
      return "inverse-multiquadric";
  }
  throw ContractError("unknown activation kind");
}

ActivationKind activation_from_string(std::string_view name) {
  if (name == "gaussian") return ActivationKind::Gaussian;
  if (name == "exp-abs") return ActivationKind::ExpAbs;
  if (name == "multiquadric") return ActivationKind::Multiquadric;
  if (name == "inverse-multiquadric") return ActivationKind::InverseMultiquadric;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

Eigen::VectorXd RbfNetwork::flatten() const {
  Eigen::VectorXd params(parameter_count());
  params.head(hidden_count) = weights;
  params.segment(hidden_count, hidden_count) = spreads;
  for (int i = 0; i < hidden_count; ++i) {
    params.segment(2 * hidden_count + i * input_dim, input_dim) = centers.row(i);
  }
  return params;
}

void RbfNetwork::unflatten(const Eigen::VectorXd& params) {
  if (params.size() != parameter_count()) {
    throw ContractError("parameter vector has wrong length");
  }
  weights = params.head(hidden_count);
  spreads = params.segment(hidden_count, hidden_count);
  for (int i = 0; i < hidden_count; ++i) {
    centers.row(i) = params.segment(2 * hidden_count + i * input_dim, input_dim);
  }
}

void RbfNetwork::validate() const {
  if (hidden_count < 1 || input_dim < 1) {
    throw ContractError("network must have at least one hidden neuron and one input");
  }
  if (weights.size() != hidden_count || spreads.size() != hidden_count ||
      centers.rows() != hidden_count || centers.cols() != input_dim) {
    throw ContractError("network parameter shapes do not match M and p");
  }
  if (!weights.allFinite() || !spreads.allFinite() || !centers.allFinite()) {
    throw ContractError("network parameters must be finite");
  }
}

namespace {

double squared_distance(const RbfNetwork& net, const Configuration& n, int neuron) {
  double r2 = 0.0;
  for (int j = 0; j < net.input_dim; ++j) {
    const double d = static_cast<double>(n[j]) - net.centers(neuron, j);
    r2 += d * d;
  }
  return r2;
}

double basis_value(ActivationKind kind, double abs_b, double b, double r2) {
  switch (kind) {
    case ActivationKind::Gaussian:
      return std::exp(-abs_b * r2);
    case ActivationKind::ExpAbs:
      return std::exp(-abs_b * std::sqrt(r2));
    case ActivationKind::Multiquadric:
      return std::sqrt(r2 - b * b);
    case ActivationKind::InverseMultiquadric:
      return 1.0 / std::sqrt(r2 - b * b);
  }
  throw ContractError("unknown activation kind");
}

}  // namespace

double evaluate(const RbfNetwork& net, const Configuration& n) {
  if (static_cast<int>(n.size()) != net.input_dim) {
    throw ContractError("configuration dimension does not match network input");
  }
  double psi = 0.0;
  for (int i = 0; i < net.hidden_count; ++i) {
    const double b = net.spreads[i];
    psi += net.weights[i] * basis_value(net.activation, std::abs(b), b, squared_distance(net, n, i));
  }
  if (!std::isfinite(psi)) {
    throw NumericalError("network evaluation is not finite");
  }
  return psi;
}

Eigen::VectorXd log_derivatives(const RbfNetwork& net, const Configuration& n,
                                double psi_floor) {
  if (!is_differentiable(net.activation)) {
    throw ContractError("log-derivatives are only defined for gaussian and exp-abs activations");
  }
  if (static_cast<int>(n.size()) != net.input_dim) {
    throw ContractError("configuration dimension does not match network input");
  }
  const int m = net.hidden_count;
  const int p = net.input_dim;
  const bool gaussian = net.activation == ActivationKind::Gaussian;

  double psi = 0.0;
  Eigen::VectorXd rho(m), r2(m);
  for (int i = 0; i < m; ++i) {
    if (net.spreads[i] == 0.0) {
      throw SingularityError("spread parameter is exactly zero");
    }
    r2[i] = squared_distance(net, n, i);
    rho[i] = basis_value(net.activation, std::abs(net.spreads[i]), net.spreads[i], r2[i]);
    psi += net.weights[i] * rho[i];
  }
  if (std::abs(psi) < psi_floor) {
    throw DivisionHazardError("|psi| is below the division floor");
  }

  Eigen::VectorXd out(net.parameter_count());
  for (int i = 0; i < m; ++i) {
    const double a = net.weights[i];
    const double b = net.spreads[i];
    const double sign_b = b > 0.0 ? 1.0 : -1.0;
    const double rho_over_psi = rho[i] / psi;
    out[i] = rho_over_psi;
    if (gaussian) {
      out[m + i] = -a * sign_b * r2[i] * rho_over_psi;
      for (int j = 0; j < p; ++j) {
        const double dj = static_cast<double>(n[j]) - net.centers(i, j);
        out[2 * m + i * p + j] = 2.0 * a * std::abs(b) * dj * rho_over_psi;
      }
    } else {
      const double r = std::sqrt(r2[i]);
      out[m + i] = -a * sign_b * r * rho_over_psi;
      for (int j = 0; j < p; ++j) {
        // At r = 0 the kink has no one-sided preference; the symmetric limit is 0.
        const double dj = static_cast<double>(n[j]) - net.centers(i, j);
        out[2 * m + i * p + j] = r > 0.0 ? a * std::abs(b) * dj * rho_over_psi / r : 0.0;
      }
    }
  }
  if (!out.allFinite()) {
    throw NumericalError("log-derivative vector is not finite");
  }
  return out;
}

RbfNetwork init_random(int hidden_count, int input_dim, int n_max,
                       std::uint64_t seed, double scale, ActivationKind activation) {
  if (hidden_count < 1 || input_dim < 1 || n_max < 1) {
    throw ContractError("init_random requires M >= 1, p >= 1, n_max >= 1");
  }
  if (!(scale > 0.01)) {
    throw ContractError("init_random requires scale > 0.01, the spread floor");
  }
  RbfNetwork net;
  net.hidden_count = hidden_count;
  net.input_dim = input_dim;
  net.activation = activation;
  net.weights.resize(hidden_count);
  net.spreads.resize(hidden_count);
  net.centers.resize(hidden_count, input_dim);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-scale, scale);
  std::uniform_real_distribution<double> pos(0.0, static_cast<double>(n_max - 1));
  for (int i = 0; i < hidden_count; ++i) {
    net.weights[i] = amp(rng);
  }
  for (int i = 0; i < hidden_count; ++i) {
    // |b| stays away from zero: b = 0 has no derivative and a flat basis
    // function adds nothing.
    double b = amp(rng);
    while (std::abs(b) < 0.01) b = amp(rng);
    net.spreads[i] = b;
  }
  for (int i = 0; i < hidden_count; ++i) {
    for (int j = 0; j < input_dim; ++j) {
      net.centers(i, j) = pos(rng);
    }
  }
  return net;
}

}  // namespace rbfvmc
