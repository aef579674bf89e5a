#include "specrank/simulator.hpp"

#include <cmath>
#include <string>

namespace specrank {

namespace {

void validate_scenario(const SimScenario& scn) {
  if (scn.d < 1) throw InvalidInputError("scenario: d must be >= 1");
  if (scn.n < 2) throw InvalidInputError("scenario: n must be >= 2");
  if (scn.eta < 0.0) throw InvalidInputError("scenario: eta must be >= 0");
  switch (scn.kind) {
    case ScenarioKind::H0RankR:
      if (scn.r < 1 || scn.r > scn.d) {
        throw InvalidInputError("scenario: rank r out of range");
      }
      if (scn.lambda2_star != 0.0) {
        throw InvalidInputError("scenario: H0 requires lambda2_star == 0");
      }
      break;
    case ScenarioKind::H1RankR1:
      if (scn.r < 1 || scn.r + 1 > scn.d) {
        throw InvalidInputError(
            "scenario: rank-" + std::to_string(scn.r + 1) +
            " alternative needs d >= " + std::to_string(scn.r + 1));
      }
      if (scn.d < 2) {
        throw InvalidInputError("scenario: d < 2 for rank-2 scenarios");
      }
      if (!(scn.lambda2_star > 0.0)) {
        throw InvalidInputError("scenario: H1 requires lambda2_star > 0");
      }
      break;
    case ScenarioKind::ConstantSigma:
    case ScenarioKind::PureNoise:
      break;
  }
}

}  // namespace

std::vector<double> effective_base_diag(const SimScenario& scn) {
  if (!scn.base_diag.empty()) return scn.base_diag;
  switch (scn.kind) {
    case ScenarioKind::H0RankR:
      return std::vector<double>(static_cast<size_t>(scn.r), 1.0);
    case ScenarioKind::H1RankR1: {
      std::vector<double> bd(static_cast<size_t>(scn.r + 1), 1.0);
      bd.back() = 0.5;
      return bd;
    }
    case ScenarioKind::ConstantSigma:
      return std::vector<double>(static_cast<size_t>(scn.d), 1.0);
    case ScenarioKind::PureNoise:
      return {};
  }
  return {};
}

Matrix CovariancePath::sigma_at(long i) const {
  const Matrix& f = factor_at(i);
  if (f.cols() == 0) return Matrix::Zero(d, d);
  Matrix s = Matrix::Zero(d, d);
  s.selfadjointView<Eigen::Lower>().rankUpdate(f, 1.0);
  return Matrix(s.selfadjointView<Eigen::Lower>());
}

Matrix eigen_adjust_factor(const Matrix& A, double lambda_star) {
  const int k = static_cast<int>(A.cols());
  if (k < 1) throw InvalidInputError("eigen_adjust_factor: empty factor");
  if (lambda_star < 0.0) {
    throw InvalidInputError("eigen_adjust_factor: lambda_star must be >= 0");
  }
  const Matrix gram = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
  // Descending order; V = A W diag(mu^{-1/2}) are the orthonormal
  // eigenvectors of A A^T for its nonzero spectrum.
  Vector mu(k);
  Matrix w(k, k);
  for (int c = 0; c < k; ++c) {
    mu(c) = solver.eigenvalues()(k - 1 - c);
    w.col(c) = solver.eigenvectors().col(k - 1 - c);
  }
  Matrix f(A.rows(), k);
  for (int c = 0; c < k; ++c) {
    const double target = (c == k - 1) ? lambda_star : mu(c);
    if (mu(c) <= 0.0) {
      f.col(c).setZero();
      continue;
    }
    f.col(c) = (A * w.col(c)) * (std::sqrt(target) / std::sqrt(mu(c)));
  }
  return f;
}

CovariancePath gen_covariance_path(const SimScenario& scn, Rng& rng) {
  validate_scenario(scn);
  const std::vector<double> bd = effective_base_diag(scn);
  CovariancePath path;
  path.n_fine = scn.n;
  path.d = scn.d;

  if (scn.kind == ScenarioKind::PureNoise) {
    path.rank_claim = 0;
    path.time_invariant = true;
    path.factors = {Matrix::Zero(scn.d, 0)};
    return path;
  }

  if (scn.kind == ScenarioKind::ConstantSigma) {
    const int k = static_cast<int>(bd.size());
    if (k > scn.d) {
      throw InvalidInputError("scenario: base_diag longer than dimension");
    }
    Matrix f = Matrix::Zero(scn.d, k);
    int rank = 0;
    for (int c = 0; c < k; ++c) {
      if (bd[static_cast<size_t>(c)] < 0.0) {
        throw InvalidInputError("scenario: base_diag must be nonnegative");
      }
      f(c, c) = std::sqrt(bd[static_cast<size_t>(c)]);
      if (bd[static_cast<size_t>(c)] > 0.0) ++rank;
    }
    path.rank_claim = rank;
    path.time_invariant = true;
    path.factors = {std::move(f)};
    return path;
  }

  // Wishart-type factor paths: A(t) = A0 + B(t), Sigma = A A^T.
  const int k = scn.kind == ScenarioKind::H0RankR ? scn.r : scn.r + 1;
  if (static_cast<int>(bd.size()) != k) {
    throw InvalidInputError("scenario: base_diag must have " +
                            std::to_string(k) + " entries");
  }
  if (k > scn.d) throw InvalidInputError("scenario: factor rank exceeds d");

  Matrix a0 = Matrix::Zero(scn.d, k);
  for (int c = 0; c < k; ++c) {
    if (bd[static_cast<size_t>(c)] < 0.0) {
      throw InvalidInputError("scenario: base_diag must be nonnegative");
    }
    a0(c, c) = std::sqrt(bd[static_cast<size_t>(c)]);
  }

  const double step_sd = std::sqrt(1.0 / static_cast<double>(scn.n));
  path.rank_claim = k;
  path.factors.resize(static_cast<size_t>(scn.n) + 1);
  Matrix a = a0;
  for (long i = 0; i <= scn.n; ++i) {
    if (i > 0) {
      for (int c = 0; c < k; ++c) {
        for (int row = 0; row < scn.d; ++row) {
          a(row, c) += step_sd * rng.gauss();
        }
      }
    }
    if (scn.kind == ScenarioKind::H1RankR1) {
      path.factors[static_cast<size_t>(i)] =
          eigen_adjust_factor(a, scn.lambda2_star);
    } else {
      path.factors[static_cast<size_t>(i)] = a;
    }
  }
  return path;
}

ObservationGrid simulate_observations(const CovariancePath& path, double eta,
                                      Rng& rng) {
  if (eta < 0.0) {
    throw InvalidInputError("simulate_observations: eta must be >= 0");
  }
  const long n = path.n_fine;
  const int d = path.d;
  ObservationGrid grid;
  grid.n = n;
  grid.d = d;
  grid.values = Matrix::Zero(n + 1, d);
  grid.meta.eta = eta;

  const double step_sd = std::sqrt(1.0 / static_cast<double>(n));
  Matrix x = Matrix::Zero(n + 1, d);

  if (path.rank_claim > 0) {
    Matrix root;  // Sigma^{1/2} for the current step
    if (path.time_invariant) root = sqrt_psd(path.sigma_at(0));
    Vector xi(d);
    for (long i = 0; i < n; ++i) {
      if (!path.time_invariant) {
        const Matrix& f = path.factor_at(i);
        const int k = static_cast<int>(f.cols());
        // Sigma^{1/2} = F Gram^{-1/2} F^T through the k x k Gram spectrum;
        // identical to the clipped symmetric root of F F^T.
        const Matrix gram = f.transpose() * f;
        Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
        Vector inv_root(k);
        for (int c = 0; c < k; ++c) {
          const double mu = solver.eigenvalues()(c);
          inv_root(c) = mu > 0.0 ? 1.0 / std::sqrt(mu) : 0.0;
        }
        root = f * solver.eigenvectors() * inv_root.asDiagonal() *
               solver.eigenvectors().transpose() * f.transpose();
      }
      for (int c = 0; c < d; ++c) xi(c) = rng.gauss();
      x.row(i + 1) = x.row(i) + (step_sd * (root * xi)).transpose();
    }
  }

  grid.values = x;
  if (eta > 0.0) {
    for (long i = 0; i <= n; ++i) {
      for (int c = 0; c < d; ++c) {
        grid.values(i, c) += eta * rng.gauss();
      }
    }
  }
  return grid;
}

ObservationGrid simulate_scenario(const SimScenario& scn) {
  Rng rng(scn.seed);
  const CovariancePath path = gen_covariance_path(scn, rng);
  ObservationGrid grid = simulate_observations(path, scn.eta, rng);
  grid.meta.eta = scn.eta;
  grid.meta.seed = scn.seed;
  grid.meta.scenario = to_string(scn.kind);
  return grid;
}

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::H0RankR:
      return "h0";
    case ScenarioKind::H1RankR1:
      return "h1";
    case ScenarioKind::ConstantSigma:
      return "const";
    case ScenarioKind::PureNoise:
      return "noise";
  }
  return "?";
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
  if (s == "h0") return ScenarioKind::H0RankR;
  if (s == "h1") return ScenarioKind::H1RankR1;
  if (s == "const") return ScenarioKind::ConstantSigma;
  if (s == "noise") return ScenarioKind::PureNoise;
  throw InvalidInputError("unknown scenario kind: " + s);
}

}  // namespace specrank
