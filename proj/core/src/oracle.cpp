#include "rbfvmc/oracle.hpp"

#include <cmath>

#include "rbfvmc/errors.hpp"

namespace rbfvmc {

double ho1d_energy(double field) {
  if (!std::isfinite(field)) throw ContractError("field must be finite");
  return 0.5 * (1.0 - field * field);
}

double ho2d_energy(double field_x, double field_y) {
  if (!std::isfinite(field_x) || !std::isfinite(field_y)) {
    throw ContractError("fields must be finite");
  }
  return 1.0 - 0.5 * (field_x * field_x + field_y * field_y);
}

Eigen::VectorXd ho1d_overlaps(double field, int n_max) {
  if (!std::isfinite(field)) throw ContractError("field must be finite");
  if (n_max < 1) throw ContractError("n_max must be positive");
  Eigen::VectorXd v(n_max);
  v[0] = std::exp(-0.25 * field * field);
  for (int n = 1; n < n_max; ++n) {
    v[n] = v[n - 1] * field / std::sqrt(2.0 * n);
  }
  return v;
}

double box_perturbation(double slope, int order) {
  if (!std::isfinite(slope)) throw ContractError("slope must be finite");
  if (order < 1 || order > 2) throw ContractError("order must be 1 or 2");
  constexpr double kPi = 3.14159265358979323846;
  double e = kPi * kPi / 2.0 + 0.5 * slope;
  if (order == 2) e += -0.002194 * slope * slope;
  return e;
}

OracleResult dense_lowest_eig(const ModelSpec& model, long cap) {
  const Eigen::MatrixXd h = dense_matrix(model, cap);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) {
    throw OracleError("dense eigensolver did not converge");
  }
  OracleResult result;
  result.energy = solver.eigenvalues()(0);
  result.gap = h.rows() > 1 ? solver.eigenvalues()(1) - solver.eigenvalues()(0) : 0.0;
  result.eigenvector = solver.eigenvectors().col(0);
  for (Eigen::Index i = 0; i < result.eigenvector.size(); ++i) {
    if (std::abs(result.eigenvector[i]) > 1e-12) {
      if (result.eigenvector[i] < 0.0) result.eigenvector = -result.eigenvector;
      break;
    }
  }
  const double residual =
      (h * result.eigenvector - result.energy * result.eigenvector).norm();
  if (residual > 1e-9 * std::max(1.0, std::abs(result.energy))) {
    throw OracleError("eigenpair residual is too large");
  }
  return result;
}

}  // namespace rbfvmc
