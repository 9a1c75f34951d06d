#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string_view>
#include <vector>

namespace rbfvmc {

// Monte Carlo state: one integer quantum number per input dimension.
using Configuration = std::vector<int>;

enum class ActivationKind {
  Gaussian,             // exp(-|b| r^2)
  ExpAbs,               // exp(-|b| r)
  Multiquadric,         // sqrt(r^2 - b^2), evaluation only
  InverseMultiquadric,  // (r^2 - b^2)^(-1/2), evaluation only
};

// Gaussian and exp-abs have analytic log-derivatives and can be optimized;
// the multiquadric pair is evaluation-only.
bool is_differentiable(ActivationKind kind);

std::string_view to_string(ActivationKind kind);
ActivationKind activation_from_string(std::string_view name);

// Division floor below which psi ratios are treated as a numerical hazard.
inline constexpr double kDefaultPsiFloor = 1e-300;

// Radial basis network with a single output neuron,
//   psi(n) = sum_i a_i rho_i(||n - c_i||),
// used as the variational amplitude over a truncated integer basis.
// The spread parameter enters every formula through |b_i|.
struct RbfNetwork {
  int hidden_count = 0;  // M
  int input_dim = 0;     // p
  Eigen::VectorXd weights;  // a, length M
  Eigen::VectorXd spreads;  // b, length M
  Eigen::MatrixXd centers;  // c, M rows of length p
  ActivationKind activation = ActivationKind::Gaussian;

  int parameter_count() const { return hidden_count * (input_dim + 2); }

  // Flat parameter vector in the fixed order: all a, all b, then c row-major.
  // This order also fixes the indexing of the covariance matrix and forces.
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& params);

  // Throws ContractError if the shape fields are inconsistent or any
  // parameter is non-finite.
  void validate() const;
};

// psi(n). Throws ContractError on dimension mismatch and NumericalError if
// the result is non-finite (possible for the multiquadric pair).
double evaluate(const RbfNetwork& net, const Configuration& n);

// d log psi / d lambda_i for every parameter, in flatten() order.
// Requires a differentiable activation and |psi(n)| >= psi_floor.
// A spread of exactly zero has no derivative and raises SingularityError.
Eigen::VectorXd log_derivatives(const RbfNetwork& net, const Configuration& n,
                                double psi_floor = kDefaultPsiFloor);

// Deterministic random initialization. Weights and spreads are uniform on
// [-scale, scale] with spreads resampled until |b| >= 0.01; centers are
// uniform over the truncated basis range [0, n_max - 1] so that initial
// amplitudes are not vanishingly small anywhere a walker can sit.
RbfNetwork init_random(int hidden_count, int input_dim, int n_max,
                       std::uint64_t seed, double scale = 1.0,
                       ActivationKind activation = ActivationKind::Gaussian);

}  // namespace rbfvmc
