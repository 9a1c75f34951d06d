#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "rbfvmc/network.hpp"

namespace rbfvmc {

// 1D harmonic oscillator in a linear field, in the eigenbasis of the
// unperturbed oscillator: H = H0 + field * x.
struct Ho1d {
  double field = 0.0;
  int n_max = 2;
};

// Two independent oscillator axes, each with its own linear field.
struct Ho2d {
  double field_x = 0.0;
  double field_y = 0.0;
  int n_max = 2;
};

// Particle in the unit box with a linear tilt, in the sine-mode basis:
// H = H0 + slope * x.
struct ParticleBox {
  double slope = 0.0;
  int n_max = 2;
};

// Real symmetric matrix treated as a Hamiltonian over basis points 0..dim-1.
// A null entries pointer selects the built-in generator
// H(p, q) = 1/p + 1/q with 1-based labels.
struct HermitianMatrix {
  int dim = 2;
  std::shared_ptr<const Eigen::MatrixXd> entries;
};

struct ModelSpec {
  std::variant<Ho1d, Ho2d, ParticleBox, HermitianMatrix> variant;

  // Throws ContractError if the truncation is below 2 or parameters are
  // not finite (a stored matrix is additionally checked for symmetry).
  void validate() const;
};

// One nonzero row of the truncated Hamiltonian, diagonal entry included.
struct RowEntry {
  Configuration to;
  double element;
};
struct SparseRow {
  std::vector<RowEntry> entries;
  auto begin() const { return entries.begin(); }
  auto end() const { return entries.end(); }
};

int input_dim(const ModelSpec& model);

// Inclusive per-dimension upper bound of the truncated configuration space.
std::vector<int> upper_bounds(const ModelSpec& model);

// Number of basis states in the truncated space.
long basis_size(const ModelSpec& model);

bool in_range(const ModelSpec& model, const Configuration& n);

// Row-major flattening of a configuration, consistent with dense_matrix().
long flat_index(const ModelSpec& model, const Configuration& n);
Configuration unflatten_index(const ModelSpec& model, long index);

// All nonzero matrix elements <n|H|n'> with n' in the truncated range.
// Elements that connect outside the truncation are dropped.
SparseRow connected_row(const ModelSpec& model, const Configuration& n);

// E_local(n) = sum_{n'} <n|H|n'> psi(n') / psi(n).
double local_energy(const ModelSpec& model, const RbfNetwork& net,
                    const Configuration& n, double psi_floor = kDefaultPsiFloor);

inline constexpr long kDefaultDenseCap = 4096;

// Full truncated Hamiltonian, assembled row by row from connected_row.
// Throws SizeError when the basis exceeds the cap.
Eigen::MatrixXd dense_matrix(const ModelSpec& model, long cap = kDefaultDenseCap);

// Plain-text dense matrix: first line "d", then d rows of d reals.
// Rejects asymmetry beyond 1e-10.
HermitianMatrix load_matrix_file(const std::string& path);

// Network amplitudes over the whole truncated basis, in flat-index order.
// Throws SizeError when the basis exceeds the cap.
Eigen::VectorXd tabulate_amplitudes(const RbfNetwork& net, const ModelSpec& model,
                                    long cap = kDefaultDenseCap);

}  // namespace rbfvmc
