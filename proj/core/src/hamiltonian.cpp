#include "rbfvmc/hamiltonian.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "rbfvmc/errors.hpp"

namespace rbfvmc {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Position element between oscillator levels k and k+1, in natural units.
// The eigenbasis phases are fixed so that the linear-field coupling is
// negative; the truncated ground state then carries non-negative
// amplitudes, matching the closed-form overlap references.
double oscillator_hop(int k) { return -std::sqrt((k + 1) / 2.0); }

// Tilt element between 1-based sine modes k1 != k2 of the unit box.
// Vanishes when k1 + k2 is even.
double box_hop(int k1, int k2) {
  if (((k1 + k2) & 1) == 0) return 0.0;
  const double d = k1 - k2;
  const double s = k1 + k2;
  return -8.0 * k1 * k2 / (d * d * s * s * kPi * kPi);
}

double generator_element(int p, int q) { return 1.0 / p + 1.0 / q; }

void check_symmetry(const Eigen::MatrixXd& h, double tol, const char* what) {
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < h.cols(); ++j) {
      if (std::abs(h(i, j) - h(j, i)) > tol) {
        throw NumericalError(std::string(what) + " is not symmetric");
      }
    }
  }
}

}  // namespace

void ModelSpec::validate() const {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Ho1d>) {
          if (m.n_max < 2) throw ContractError("n_max must be at least 2");
          if (!std::isfinite(m.field)) throw ContractError("field must be finite");
        } else if constexpr (std::is_same_v<T, Ho2d>) {
          if (m.n_max < 2) throw ContractError("n_max must be at least 2");
          if (!std::isfinite(m.field_x) || !std::isfinite(m.field_y)) {
            throw ContractError("fields must be finite");
          }
        } else if constexpr (std::is_same_v<T, ParticleBox>) {
          if (m.n_max < 2) throw ContractError("n_max must be at least 2");
          if (!std::isfinite(m.slope)) throw ContractError("slope must be finite");
        } else {
          if (m.dim < 2) throw ContractError("matrix dimension must be at least 2");
          if (m.entries) {
            if (m.entries->rows() != m.dim || m.entries->cols() != m.dim) {
              throw ContractError("stored matrix shape does not match dim");
            }
            if (!m.entries->allFinite()) throw ContractError("matrix entries must be finite");
            check_symmetry(*m.entries, 1e-10, "stored matrix");
          }
        }
      },
      variant);
}

int input_dim(const ModelSpec& model) {
  return std::holds_alternative<Ho2d>(model.variant) ? 2 : 1;
}

std::vector<int> upper_bounds(const ModelSpec& model) {
  return std::visit(
      [](const auto& m) -> std::vector<int> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Ho2d>) {
          return {m.n_max - 1, m.n_max - 1};
        } else if constexpr (std::is_same_v<T, HermitianMatrix>) {
          return {m.dim - 1};
        } else {
          return {m.n_max - 1};
        }
      },
      model.variant);
}

long basis_size(const ModelSpec& model) {
  long size = 1;
  for (int ub : upper_bounds(model)) size *= ub + 1;
  return size;
}

bool in_range(const ModelSpec& model, const Configuration& n) {
  const auto ub = upper_bounds(model);
  if (n.size() != ub.size()) return false;
  for (std::size_t j = 0; j < ub.size(); ++j) {
    if (n[j] < 0 || n[j] > ub[j]) return false;
  }
  return true;
}

long flat_index(const ModelSpec& model, const Configuration& n) {
  const auto ub = upper_bounds(model);
  long idx = 0;
  for (std::size_t j = 0; j < ub.size(); ++j) {
    idx = idx * (ub[j] + 1) + n[j];
  }
  return idx;
}

Configuration unflatten_index(const ModelSpec& model, long index) {
  const auto ub = upper_bounds(model);
  Configuration n(ub.size());
  for (std::size_t j = ub.size(); j-- > 0;) {
    const long width = ub[j] + 1;
    n[j] = static_cast<int>(index % width);
    index /= width;
  }
  return n;
}

SparseRow connected_row(const ModelSpec& model, const Configuration& n) {
  if (!in_range(model, n)) {
    throw ContractError("configuration is outside the truncated range");
  }
  SparseRow row;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Ho1d>) {
          const int k = n[0];
          row.entries.push_back({n, k + 0.5});
          if (m.field != 0.0) {
            if (k > 0) row.entries.push_back({{k - 1}, m.field * oscillator_hop(k - 1)});
            if (k + 1 < m.n_max) row.entries.push_back({{k + 1}, m.field * oscillator_hop(k)});
          }
        } else if constexpr (std::is_same_v<T, Ho2d>) {
          const int kx = n[0];
          const int ky = n[1];
          row.entries.push_back({n, kx + ky + 1.0});
          if (m.field_x != 0.0) {
            if (kx > 0) row.entries.push_back({{kx - 1, ky}, m.field_x * oscillator_hop(kx - 1)});
            if (kx + 1 < m.n_max) row.entries.push_back({{kx + 1, ky}, m.field_x * oscillator_hop(kx)});
          }
          if (m.field_y != 0.0) {
            if (ky > 0) row.entries.push_back({{kx, ky - 1}, m.field_y * oscillator_hop(ky - 1)});
            if (ky + 1 < m.n_max) row.entries.push_back({{kx, ky + 1}, m.field_y * oscillator_hop(ky)});
          }
        } else if constexpr (std::is_same_v<T, ParticleBox>) {
          // Internal levels are 0-based; the matrix-element formulas use
          // 1-based sine-mode labels.
          const int k1 = n[0] + 1;
          row.entries.push_back({n, kPi * kPi * k1 * k1 / 2.0 + 0.5 * m.slope});
          if (m.slope != 0.0) {
            for (int l = 0; l < m.n_max; ++l) {
              if (l == n[0]) continue;
              const double element = m.slope * box_hop(k1, l + 1);
              if (element != 0.0) row.entries.push_back({{l}, element});
            }
          }
        } else {
          const int i = n[0];
          if (m.entries) {
            for (int q = 0; q < m.dim; ++q) {
              const double element = (*m.entries)(i, q);
              if (element != 0.0 || q == i) row.entries.push_back({{q}, element});
            }
          } else {
            for (int q = 0; q < m.dim; ++q) {
              row.entries.push_back({{q}, generator_element(i + 1, q + 1)});
            }
          }
        }
      },
      model.variant);
  return row;
}

double local_energy(const ModelSpec& model, const RbfNetwork& net,
                    const Configuration& n, double psi_floor) {
  const double psi_n = evaluate(net, n);
  if (std::abs(psi_n) < psi_floor) {
    throw DivisionHazardError("|psi(n)| is below the division floor");
  }
  double e = 0.0;
  for (const RowEntry& entry : connected_row(model, n)) {
    e += entry.element * (entry.to == n ? 1.0 : evaluate(net, entry.to) / psi_n);
  }
  if (!std::isfinite(e)) {
    throw NumericalError("local energy is not finite");
  }
  return e;
}

Eigen::MatrixXd dense_matrix(const ModelSpec& model, long cap) {
  model.validate();
  const long size = basis_size(model);
  if (size > cap) {
    throw SizeError("truncated basis exceeds the dense assembly cap");
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(size, size);
  for (long i = 0; i < size; ++i) {
    const Configuration n = unflatten_index(model, i);
    for (const RowEntry& entry : connected_row(model, n)) {
      h(i, flat_index(model, entry.to)) = entry.element;
    }
  }
  check_symmetry(h, 1e-12, "assembled matrix");
  return h;
}

Eigen::VectorXd tabulate_amplitudes(const RbfNetwork& net, const ModelSpec& model,
                                    long cap) {
  model.validate();
  if (net.input_dim != input_dim(model)) {
    throw ContractError("network input dimension does not match the model");
  }
  const long size = basis_size(model);
  if (size > cap) {
    throw SizeError("truncated basis exceeds the tabulation cap");
  }
  Eigen::VectorXd psi(size);
  for (long i = 0; i < size; ++i) {
    psi[i] = evaluate(net, unflatten_index(model, i));
  }
  return psi;
}

HermitianMatrix load_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open matrix file '" + path + "'");
  }
  long dim = 0;
  if (!(in >> dim) || dim < 2) {
    throw ConfigError("matrix file must start with a dimension of at least 2");
  }
  if (dim > 100000) {
    throw ConfigError("matrix dimension is implausibly large");
  }
  auto entries = std::make_shared<Eigen::MatrixXd>(dim, dim);
  for (long i = 0; i < dim; ++i) {
    for (long j = 0; j < dim; ++j) {
      double value = 0.0;
      if (!(in >> value)) {
        throw ConfigError("matrix file ended before all entries were read");
      }
      if (!std::isfinite(value)) {
        throw ConfigError("matrix file contains a non-finite entry");
      }
      (*entries)(i, j) = value;
    }
  }
  for (long i = 0; i < dim; ++i) {
    for (long j = i + 1; j < dim; ++j) {
      if (std::abs((*entries)(i, j) - (*entries)(j, i)) > 1e-10) {
        throw ConfigError("matrix file is not symmetric");
      }
    }
  }
  return HermitianMatrix{static_cast<int>(dim), std::move(entries)};
}

}  // namespace rbfvmc
