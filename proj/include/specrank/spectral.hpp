#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specrank/matrix_tools.hpp"
#include "specrank/weights.hpp"

namespace specrank {

struct GridMeta {
  double eta = 0.0;          // observation noise standard deviation
  std::uint64_t seed = 0;    // generating seed (0 for real data)
  std::string scenario;      // scenario tag
};

/// Equispaced noisy observations Y_0..Y_n of the latent path at times i/n.
struct ObservationGrid {
  long n = 0;     // number of intervals
  int d = 0;      // dimension
  Matrix values;  // (n+1) x d
  GridMeta meta;
};

/// Observation window I = [t, t+h]; holds the 1-based range of increments
/// i whose midpoint (i-1/2)/n falls inside the window.
struct Block {
  double t = 0.0;
  double h = 0.0;
  long first_increment = 1;
  long last_increment = 0;
  long count() const { return last_increment - first_increment + 1; }
};

/// Block for an arbitrary window [t, t+h] within the grid.
Block make_block(const ObservationGrid& grid, double t, double h);

/// The k-th block of the partition of [0,1] into blocks of m increments.
Block partition_block(const ObservationGrid& grid, long m, long k);

/// Local spectral statistics of one block: row j-1 holds
/// S_j = sum_i Phi_j((i-1/2)/n) (Y_i - Y_{i-1}) over the block's increments,
/// with Phi_j(s) = sqrt(2/h) sin(j pi (s - t)/h).
struct SpectralStats {
  Block block;
  int J = 0;
  Matrix S;  // J x d
};

SpectralStats spectral_stats(const ObservationGrid& grid, const Block& block,
                             int J);

/// Local noise level eps_{n,h} = pi * eta / (h * sqrt(n)), the per-block
/// inverse signal-to-noise ratio.
double local_noise_level(long n, double h, double eta);

/// Block covariance estimate C_hat = sum_j w_j S_j S_j^T together with the
/// debiased Sigma_hat = C_hat - B_w eps^2 I (stored as that exact
/// subtraction) and the descending eigenvalues of C_hat.
struct LocalEstimate {
  Matrix C_hat;
  Matrix Sigma_hat;
  double eps = 0.0;
  double B_w = 0.0;
  Vector eigenvalues_C;  // descending
};

LocalEstimate local_estimate(const SpectralStats& stats,
                             const SpectralWeights& weights, double eps);

/// Null-hypothesis class parameters: rank r, Hoelder exponent beta and
/// constant L, spectral gap lower bound for the r-th eigenvalue, and (for
/// alternatives) the prescribed (r+1)-st eigenvalue floor.
struct HypothesisParams {
  int r = 1;
  double beta = 0.5;
  double L = 1.0;
  double lambda_gap = 1.0;   // lower bound on lambda_r under the null
  double lambda_alt = 0.0;   // lambda_{r+1} floor under the alternative
};

/// Worst-case magnitude of the (r+1)-st eigenvalue of the block-averaged
/// covariance under the null: min(2 L h^beta, (r+4) L^2 h^{2 beta} / gap);
/// the first branch alone when the gap is zero.
double bias0(const HypothesisParams& params, double h);

/// Exact covariance of vec(Sigma_hat) for constant Sigma on the block:
/// (sum_{j<=J} w_j^2 (C_j kron C_j)) * Z_d with C_j = Sigma + j^2 eps^2 I.
/// Cross-frequency terms vanish because the S_j are independent when Sigma
/// is constant.
Matrix exact_cov_constant_sigma(const Matrix& Sigma,
                                const SpectralWeights& weights, double eps);

}  // namespace specrank
