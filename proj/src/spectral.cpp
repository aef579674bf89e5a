#include "specrank/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace specrank {

namespace {

void check_grid(const ObservationGrid& grid, const char* who) {
  if (grid.n < 2) {
    throw InvalidInputError(std::string(who) + ": grid needs n >= 2 intervals");
  }
  if (grid.d < 1 || grid.values.rows() != grid.n + 1 ||
      grid.values.cols() != grid.d) {
    throw InvalidInputError(std::string(who) + ": grid shape mismatch");
  }
}

}  // namespace

Block make_block(const ObservationGrid& grid, double t, double h) {
  check_grid(grid, "make_block");
  if (!(t >= 0.0 && t < 1.0)) {
    throw InvalidInputError("make_block: t must lie in [0,1)");
  }
  if (!(h > 0.0 && t + h <= 1.0 + 1e-12)) {
    throw InvalidInputError("make_block: h must lie in (0, 1-t]");
  }
  const double n = static_cast<double>(grid.n);
  Block b;
  b.t = t;
  b.h = h;
  b.first_increment = static_cast<long>(std::ceil(n * t + 0.5 - 1e-9));
  b.last_increment = static_cast<long>(std::floor(n * (t + h) + 0.5 + 1e-9));
  b.first_increment = std::max<long>(b.first_increment, 1);
  b.last_increment = std::min<long>(b.last_increment, grid.n);
  if (b.count() < 1) {
    throw InvalidInputError("make_block: window contains no increments");
  }
  return b;
}

Block partition_block(const ObservationGrid& grid, long m, long k) {
  check_grid(grid, "partition_block");
  if (m < 1 || m > grid.n) {
    throw InvalidInputError("partition_block: invalid block size m");
  }
  const long K = grid.n / m;
  if (k < 0 || k >= K) {
    throw InvalidInputError("partition_block: block index out of range");
  }
  Block b;
  b.h = static_cast<double>(m) / static_cast<double>(grid.n);
  b.t = static_cast<double>(k * m) / static_cast<double>(grid.n);
  b.first_increment = k * m + 1;
  b.last_increment = (k + 1) * m;
  return b;
}

SpectralStats spectral_stats(const ObservationGrid& grid, const Block& block,
                             int J) {
  check_grid(grid, "spectral_stats");
  if (J < 1) throw InvalidInputError("spectral_stats: J must be >= 1");
  const long m = block.count();
  if (m < 2L * J) {
    throw InvalidInputError(
        "spectral_stats: block too small: " + std::to_string(m) +
        " increments, minimum is 2J = " + std::to_string(2L * J));
  }
  if (block.first_increment < 1 || block.last_increment > grid.n) {
    throw InvalidInputError("spectral_stats: block outside the grid");
  }

  const double n = static_cast<double>(grid.n);
  const double norm = std::sqrt(2.0 / block.h);

  // Sine table: row j-1, column l-1 holds Phi_j at the midpoint of the l-th
  // increment of the block.
  Matrix phi(J, m);
  for (long l = 0; l < m; ++l) {
    const double mid =
        (static_cast<double>(block.first_increment + l) - 0.5) / n;
    const double x = (mid - block.t) / block.h;
    for (int j = 1; j <= J; ++j) {
      phi(j - 1, l) = norm * std::sin(j * std::numbers::pi * x);
    }
  }

  Matrix dy(m, grid.d);
  for (long l = 0; l < m; ++l) {
    const long i = block.first_increment + l;
    dy.row(l) = grid.values.row(i) - grid.values.row(i - 1);
  }

  SpectralStats stats;
  stats.block = block;
  stats.J = J;
  stats.S = phi * dy;
  return stats;
}

double local_noise_level(long n, double h, double eta) {
  if (n < 1) throw InvalidInputError("local_noise_level: n must be >= 1");
  if (!(h > 0.0)) throw InvalidInputError("local_noise_level: h must be > 0");
  if (eta < 0.0) throw InvalidInputError("local_noise_level: eta must be >= 0");
  return std::numbers::pi * eta / (h * std::sqrt(static_cast<double>(n)));
}

LocalEstimate local_estimate(const SpectralStats& stats,
                             const SpectralWeights& weights, double eps) {
  if (stats.J != weights.J) {
    throw InvalidInputError("local_estimate: stats.J = " +
                            std::to_string(stats.J) + " but weights.J = " +
                            std::to_string(weights.J));
  }
  if (eps < 0.0) throw InvalidInputError("local_estimate: eps must be >= 0");
  const int d = static_cast<int>(stats.S.cols());

  Matrix c = Matrix::Zero(d, d);
  for (int j = 0; j < stats.J; ++j) {
    c.selfadjointView<Eigen::Lower>().rankUpdate(stats.S.row(j).transpose(),
                                                 weights.w(j));
  }

  LocalEstimate est;
  est.C_hat = c.selfadjointView<Eigen::Lower>();
  est.eps = eps;
  est.B_w = weights.B_w;
  est.Sigma_hat =
      est.C_hat - (weights.B_w * eps * eps) * Matrix::Identity(d, d);
  est.eigenvalues_C = eig_sym_values(est.C_hat);
  return est;
}

double bias0(const HypothesisParams& params, double h) {
  if (!(h > 0.0)) throw InvalidInputError("bias0: h must be > 0");
  const double first = 2.0 * params.L * std::pow(h, params.beta);
  if (params.lambda_gap <= 0.0) return first;
  const double second = (params.r + 4.0) * params.L * params.L *
                        std::pow(h, 2.0 * params.beta) / params.lambda_gap;
  return std::min(first, second);
}

Matrix exact_cov_constant_sigma(const Matrix& Sigma,
                                const SpectralWeights& weights, double eps) {
  const Vector lambda = eig_sym_values(Sigma);
  const int d = static_cast<int>(Sigma.rows());
  if (lambda(d - 1) < -1e-10 * (1.0 + std::abs(lambda(0)))) {
    throw InvalidInputError(
        "exact_cov_constant_sigma: Sigma is not positive semi-definite");
  }

  const int d2 = d * d;
  Matrix acc = Matrix::Zero(d2, d2);
  for (int j = 1; j <= weights.J; ++j) {
    const double w2 = weights.w(j - 1) * weights.w(j - 1);
    const Matrix cj =
        Sigma + (static_cast<double>(j) * j * eps * eps) * Matrix::Identity(d, d);
    // (C kron C) in column-major vec convention:
    // entry ((i + a d), (k + b d)) = C(a,b) C(i,k).
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        acc.block(a * d, b * d, d, d) += (w2 * cj(a, b)) * cj;
      }
    }
  }
  return acc * z_d_tensor(d);
}

}  // namespace specrank
