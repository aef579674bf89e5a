#pragma once

#include <Eigen/Dense>

#include "specrank/errors.hpp"
#include "specrank/rng.hpp"

namespace specrank {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct EigSym {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // orthonormal columns, same order
};

/// Symmetric eigendecomposition, eigenvalues sorted descending.
/// Requires finite entries and exact symmetry.
EigSym eig_sym(const Matrix& m);

/// Eigenvalues only, descending.
Vector eig_sym_values(const Matrix& m);

/// Unique positive semi-definite square root; eigenvalues below zero are
/// clipped to zero before taking roots.
Matrix sqrt_psd(const Matrix& m);

/// GOE(d): symmetric, independent entries on the upper triangle,
/// diagonal N(0,2), off-diagonal N(0,1).
Matrix sample_goe(int dim, Rng& rng);

/// Largest eigenvalue of one GOE(dim) draw.
double sample_goe_max_eig(int dim, Rng& rng);

/// Wick tensor: entry ((i,j),(k,l)) = d_ik d_jl + d_il d_jk as a d^2 x d^2
/// matrix in column-major vec convention. Equals Cov(vec(GOE(d))).
Matrix z_d_tensor(int dim);

struct DeviationBoundInputs {
  Vector s;           // nonnegative variance sequence (s_j)
  int dim = 1;        // ambient dimension d
  double alpha = 0.05;
  Vector delta_grid;  // positive trade-off parameters to scan
};

/// 41 log-spaced points on [1e-2, 1e2].
Vector default_delta_grid();

/// High-probability bound for lambda_max(sum_j Gamma_j Gamma_j^T) with
/// independent Gamma_j ~ N(0, s_j I_d). With probability >= 1 - alpha the
/// maximal eigenvalue is below
///   inf_delta { (1+delta) ||s||_1
///             + (1+delta) log(sqrt(7e/2) d) max(sqrt(d+1)||s||_2, (d+1)||s||_inf)
///             + 2 (1+1/delta) log(1/alpha) ||s||_inf },
/// where the infimum is taken over the supplied delta grid.
double deviation_bound(const DeviationBoundInputs& in);

}  // namespace specrank
