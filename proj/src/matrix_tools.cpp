#include "specrank/matrix_tools.hpp"

#include <cmath>
#include <string>

namespace specrank {

namespace {

void check_square_symmetric_finite(const Matrix& m, const char* who) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw InvalidInputError(std::string(who) + ": matrix must be square, got " +
                            std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()));
  }
  if (!m.allFinite()) {
    throw InvalidInputError(std::string(who) + ": non-finite entries");
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      if (m(i, j) != m(j, i)) {
        throw InvalidInputError(std::string(who) + ": matrix not symmetric at (" +
                                std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
}

}  // namespace

EigSym eig_sym(const Matrix& m) {
  check_square_symmetric_finite(m, "eig_sym");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eig_sym: eigensolver failed to converge");
  }
  const Eigen::Index d = m.rows();
  EigSym out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors.resize(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    out.eigenvectors.col(c) = solver.eigenvectors().col(d - 1 - c);
  }
  return out;
}

Vector eig_sym_values(const Matrix& m) {
  check_square_symmetric_finite(m, "eig_sym_values");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eig_sym_values: eigensolver failed to converge");
  }
  return solver.eigenvalues().reverse();
}

Matrix sqrt_psd(const Matrix& m) {
  const EigSym e = eig_sym(m);
  const Eigen::Index d = m.rows();
  Vector roots(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    roots(i) = e.eigenvalues(i) > 0.0 ? std::sqrt(e.eigenvalues(i)) : 0.0;
  }
  Matrix out = e.eigenvectors * roots.asDiagonal() * e.eigenvectors.transpose();
  // Exact symmetry for downstream consumers.
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double v = 0.5 * (out(i, j) + out(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

Matrix sample_goe(int dim, Rng& rng) {
  if (dim < 1) throw InvalidInputError("sample_goe: dim must be >= 1");
  Matrix z(dim, dim);
  const double sqrt2 = std::sqrt(2.0);
  for (int i = 0; i < dim; ++i) {
    z(i, i) = sqrt2 * rng.gauss();
    for (int j = i + 1; j < dim; ++j) {
      const double g = rng.gauss();
      z(i, j) = g;
      z(j, i) = g;
    }
  }
  return z;
}

double sample_goe_max_eig(int dim, Rng& rng) {
  if (dim == 1) return std::sqrt(2.0) * rng.gauss();
  const Matrix z = sample_goe(dim, rng);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(z, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(dim - 1);
}

Matrix z_d_tensor(int dim) {
  if (dim < 1) throw InvalidInputError("z_d_tensor: dim must be >= 1");
  const int d2 = dim * dim;
  Matrix t = Matrix::Zero(d2, d2);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      const int row = i + j * dim;  // column-major vec index of (i,j)
      t(row, i + j * dim) += 1.0;   // delta_ik delta_jl
      t(row, j + i * dim) += 1.0;   // delta_il delta_jk
    }
  }
  return t;
}

Vector default_delta_grid() {
  const int n = 41;
  Vector grid(n);
  for (int i = 0; i < n; ++i) {
    grid(i) = std::pow(10.0, -2.0 + 4.0 * i / (n - 1));
  }
  return grid;
}

double deviation_bound(const DeviationBoundInputs& in) {
  if (in.delta_grid.size() == 0) {
    throw InvalidInputError("deviation_bound: empty delta grid");
  }
  if (in.dim < 1) throw InvalidInputError("deviation_bound: dim must be >= 1");
  if (!(in.alpha > 0.0 && in.alpha < 1.0)) {
    throw InvalidInputError("deviation_bound: alpha must be in (0,1)");
  }
  if (!in.s.allFinite() || (in.s.size() > 0 && in.s.minCoeff() < 0.0)) {
    throw InvalidInputError("deviation_bound: s must be finite and nonnegative");
  }

  const double l1 = in.s.size() > 0 ? in.s.sum() : 0.0;
  const double l2 = in.s.size() > 0 ? in.s.norm() : 0.0;
  const double linf = in.s.size() > 0 ? in.s.maxCoeff() : 0.0;
  const double d = static_cast<double>(in.dim);
  const double log_dim = std::log(std::sqrt(7.0 * std::exp(1.0) / 2.0) * d);
  const double mid = log_dim * std::max(std::sqrt(d + 1.0) * l2, (d + 1.0) * linf);
  const double tail = 2.0 * std::log(1.0 / in.alpha) * linf;

  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < in.delta_grid.size(); ++i) {
    const double delta = in.delta_grid(i);
    if (!(delta > 0.0)) {
      throw InvalidInputError("deviation_bound: delta grid must be positive");
    }
    const double value = (1.0 + delta) * (l1 + mid) + (1.0 + 1.0 / delta) * tail;
    best = std::min(best, value);
  }
  return best;
}

}  // namespace specrank
