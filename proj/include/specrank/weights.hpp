#pragma once

#include <Eigen/Dense>

#include "specrank/errors.hpp"

namespace specrank {

enum class WeightsMode {
  FiniteRenorm,  // w_j renormalized to sum to one over j <= J
  CwInfinite,    // w_j = c_w M^{-1} (1+j^2/M^2)^{-2}, c_w from the full series
};

/// Frequency-mixing weights w_j proportional to M^{-1}(1+j^2/M^2)^{-2}.
struct SpectralWeights {
  double M = 1.0;  // mixing parameter
  int J = 1;       // frequency cutoff
  WeightsMode mode = WeightsMode::FiniteRenorm;
  Eigen::VectorXd w;   // w[j-1] = w_j for j = 1..J, strictly decreasing
  double c_w = 0.0;    // normalizing constant
  double B_w = 0.0;    // sum_{j<=J} w_j j^2 (noise-bias constant)
  double l2_j2w = 0.0; // ||(j^2 w_j)_{j<=J}||_{l2}
};

/// Builds the weights. FiniteRenorm normalizes over j <= J so the weights sum
/// to one exactly. CwInfinite normalizes by c_w computed from the series over
/// j >= 0 (truncated sum plus closed-form integral tail, relative error below
/// 1e-10); in that mode c_w <= 4/pi for every M. B_w and l2_j2w are always
/// taken over j <= J.
SpectralWeights make_weights(double M, int J, WeightsMode mode);

/// Time-domain weight function w(s) = 1 - sum_{j<=J} w_j cos(2 pi j s).
double weight_function(const SpectralWeights& weights, double s);

const char* to_string(WeightsMode mode);
WeightsMode weights_mode_from_string(const std::string& s);

}  // namespace specrank
