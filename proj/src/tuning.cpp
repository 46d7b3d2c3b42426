#include "csd/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "csd/errors.hpp"

namespace csd {

TuningInputs estimate_moments(std::span<const ObservationPair> sample, double rho_clamp) {
  if (sample.size() < 3) {
    throw DegenerateMomentsError("moment estimation needs at least 3 records, got " +
                                 std::to_string(sample.size()));
  }
  const double n = static_cast<double>(sample.size());
  double mw = 0.0;
  double mz = 0.0;
  for (const auto& o : sample) {
    mw += o.w;
    mz += o.z;
  }
  mw /= n;
  mz /= n;
  double sww = 0.0;
  double szz = 0.0;
  double swz = 0.0;
  for (const auto& o : sample) {
    const double dw = o.w - mw;
    const double dz = o.z - mz;
    sww += dw * dw;
    szz += dz * dz;
    swz += dw * dz;
  }
  if (!(szz > 0.0)) throw DegenerateMomentsError("covariate z has zero variance");
  if (!(sww > 0.0)) throw DegenerateMomentsError("outcome w has zero variance");
  TuningInputs t;
  t.n = sample.size();
  t.mu_z = mz;
  t.sigma_z = std::sqrt(szz / (n - 1.0));
  t.rho = std::clamp(swz / std::sqrt(sww * szz), -rho_clamp, rho_clamp);
  return t;
}

double rule_of_thumb_raw(const TuningInputs& t, double z0, double rho_clamp) {
  if (!(t.sigma_z > 0.0) || !std::isfinite(t.sigma_z)) {
    throw InvalidParameterError("sigma_z must be positive and finite");
  }
  if (!std::isfinite(t.mu_z) || !std::isfinite(z0) || !std::isfinite(t.rho)) {
    throw InvalidParameterError("tuning inputs must be finite");
  }
  if (!(rho_clamp > 0.0 && rho_clamp < 1.0)) {
    throw InvalidParameterError("rho clamp must lie in (0, 1)");
  }
  using std::numbers::e;
  using std::numbers::pi;
  const double rho = std::clamp(t.rho, -rho_clamp, rho_clamp);
  const double s = t.sigma_z;
  const double d = (z0 - t.mu_z) / s;
  const double phi = std::exp(-0.5 * d * d) / (s * std::sqrt(2.0 * pi));
  const double denom = (2.0 / s) / std::sqrt(2.0 * pi * e) +
                       std::fabs(rho) / (s * std::sqrt(1.0 - rho * rho)) / std::sqrt(2.0 * pi);
  return std::sqrt(static_cast<double>(t.n)) * std::pow(4.0 * phi * phi / denom, 2.0 / 3.0);
}

std::size_t rule_of_thumb_q(const TuningInputs& t, double z0, const TuningBounds& bounds) {
  const std::size_t hi = bounds.q_max.value_or(t.n);
  if (bounds.q_min > hi) {
    throw InvalidParameterError("tuning clamp has q_min above q_max");
  }
  const double raw = rule_of_thumb_raw(t, z0, bounds.rho_clamp);
  const double rounded = std::round(raw);
  if (rounded <= static_cast<double>(bounds.q_min)) return bounds.q_min;
  if (rounded >= static_cast<double>(hi)) return hi;
  return static_cast<std::size_t>(rounded);
}

}  // namespace csd
