#include "specrank/weights.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace specrank {

namespace {

double raw_weight(double M, double j) {
  const double q = 1.0 + (j * j) / (M * M);
  return 1.0 / (M * q * q);
}

// Integral tail of sum_{j>T} M^{-1}(1+j^2/M^2)^{-2}: the midpoint rule over
// [(T+1/2)/M, inf) with the antiderivative t/(2(1+t^2)) + atan(t)/2.
double series_tail(double M, long T) {
  const double v = (static_cast<double>(T) + 0.5) / M;
  return std::numbers::pi / 4.0 - v / (2.0 * (1.0 + v * v)) - std::atan(v) / 2.0;
}

}  // namespace

SpectralWeights make_weights(double M, int J, WeightsMode mode) {
  if (!(M >= 1.0)) throw InvalidInputError("make_weights: M must be >= 1");
  if (J < 1) throw InvalidInputError("make_weights: J must be >= 1");

  SpectralWeights out;
  out.M = M;
  out.J = J;
  out.mode = mode;
  out.w.resize(J);

  double norm = 0.0;
  if (mode == WeightsMode::FiniteRenorm) {
    double sum = 0.0;
    for (int j = 1; j <= J; ++j) sum += raw_weight(M, j);
    norm = sum;
  } else {
    const long T = std::max<long>({static_cast<long>(J),
                                   static_cast<long>(std::ceil(50.0 * M)), 200});
    double sum = 0.0;
    for (long j = 0; j <= T; ++j) sum += raw_weight(M, static_cast<double>(j));
    norm = sum + series_tail(M, T);
  }
  out.c_w = 1.0 / norm;

  double b_w = 0.0;
  double l2sq = 0.0;
  for (int j = 1; j <= J; ++j) {
    const double wj = out.c_w * raw_weight(M, j);
    out.w(j - 1) = wj;
    const double jj = static_cast<double>(j) * j;
    b_w += wj * jj;
    l2sq += wj * wj * jj * jj;
  }
  out.B_w = b_w;
  out.l2_j2w = std::sqrt(l2sq);
  return out;
}

double weight_function(const SpectralWeights& weights, double s) {
  double acc = 1.0;
  for (int j = 1; j <= weights.J; ++j) {
    acc -= weights.w(j - 1) * std::cos(2.0 * std::numbers::pi * j * s);
  }
  return acc;
}

const char* to_string(WeightsMode mode) {
  return mode == WeightsMode::FiniteRenorm ? "FINITE_RENORM" : "CW_INFINITE";
}

WeightsMode weights_mode_from_string(const std::string& s) {
  if (s == "FINITE_RENORM" || s == "renorm") return WeightsMode::FiniteRenorm;
  if (s == "CW_INFINITE" || s == "cw") return WeightsMode::CwInfinite;
  throw InvalidInputError("unknown weights mode: " + s);
}

}  // namespace specrank
