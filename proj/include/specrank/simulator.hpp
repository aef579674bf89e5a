#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specrank/spectral.hpp"

namespace specrank {

enum class ScenarioKind { H0RankR, H1RankR1, ConstantSigma, PureNoise };

struct SimScenario {
  int d = 10;
  long n = 32'400;
  double eta = 0.001;
  ScenarioKind kind = ScenarioKind::H0RankR;
  int r = 1;                        // base rank
  double lambda2_star = 0.0;        // prescribed (r+1)-st eigenvalue (H1 only)
  std::vector<double> base_diag;    // leading factor loadings; defaults below
  std::uint64_t seed = 0;
};

/// Time-varying spot covariance on the fine grid i/n, stored through its
/// rank-k factors: Sigma(i/n) = F_i F_i^T with F_i in R^{d x k}.
struct CovariancePath {
  long n_fine = 0;
  int d = 0;
  int rank_claim = 0;
  bool time_invariant = false;
  std::vector<Matrix> factors;  // n_fine + 1 entries (one when time invariant)

  const Matrix& factor_at(long i) const {
    return time_invariant ? factors.front() : factors[static_cast<size_t>(i)];
  }
  Matrix sigma_at(long i) const;
};

/// Rank-controlled Wishart-type paths. H0RankR: A(t) = A0 + B(t) with A0
/// holding sqrt(base_diag) on the leading axes and B a d x r Brownian matrix;
/// Sigma = A A^T has rank r exactly with time-varying eigenvalues. H1RankR1:
/// same with r+1 factor columns, then the smallest factor eigenvalue is
/// replaced by lambda2_star via the eigendecomposition of A A^T (leading
/// eigenvalues and all eigenvectors are preserved exactly).
CovariancePath gen_covariance_path(const SimScenario& scenario, Rng& rng);

/// Replaces the smallest eigenvalue of A A^T (A is d x k) by lambda_star and
/// returns the adjusted factor F with F F^T = V diag(mu_1..mu_{k-1},
/// lambda_star) V^T. Computed through the k x k Gram matrix of A.
Matrix eigen_adjust_factor(const Matrix& A, double lambda_star);

/// Euler scheme X_{i+1} = X_i + Sigma(i/n)^{1/2} sqrt(1/n) xi_i with
/// xi_i ~ N(0, I_d), then Y_i = X_i + eta e_i with e_i ~ N(0, I_d) i.i.d.
/// The square root is the symmetric PSD root (negative eigenvalues clipped).
/// Draw order: all path gaussians first (step-major), then observation noise.
ObservationGrid simulate_observations(const CovariancePath& path, double eta,
                                      Rng& rng);

/// Path + observations from the scenario's own seed; fills grid metadata.
ObservationGrid simulate_scenario(const SimScenario& scenario);

const char* to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& s);

/// base_diag defaulting: (1) for H0 rank 1, (1, 0.5) for H1, ones(d) for
/// constant-Sigma when unset.
std::vector<double> effective_base_diag(const SimScenario& scenario);

}  // namespace specrank
