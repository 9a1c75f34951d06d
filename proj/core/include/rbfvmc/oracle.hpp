#pragma once

#include <Eigen/Dense>

#include "rbfvmc/hamiltonian.hpp"

namespace rbfvmc {

// Ground level of the oscillator in a linear field, from completing the
// square: 0.5 * (1 - field^2).
double ho1d_energy(double field);

// Separable two-dimensional variant: 1 - (fx^2 + fy^2) / 2.
double ho2d_energy(double field_x, double field_y);

// Closed-form ground-state amplitudes over the number basis, entries
// field^n e^{-field^2/4} / sqrt(2^n n!). Not normalized after truncation.
Eigen::VectorXd ho1d_overlaps(double field, int n_max);

// Tilted-box ground level through first or second order in the slope.
double box_perturbation(double slope, int order);

struct OracleResult {
  double energy = 0.0;
  double gap = 0.0;  // distance to the next level
  Eigen::VectorXd eigenvector;  // unit norm, first sizable entry positive
};

// Lowest eigenpair by dense diagonalization of the truncated matrix.
OracleResult dense_lowest_eig(const ModelSpec& model, long cap = kDefaultDenseCap);

}  // namespace rbfvmc
