#ifndef CSD_TUNING_HPP_
#define CSD_TUNING_HPP_

#include <cstddef>
#include <optional>
#include <span>

#include "csd/types.hpp"

namespace csd {

// Moments feeding the rule of thumb for one sample.
struct TuningInputs {
  std::size_t n = 0;
  double mu_z = 0.0;
  double sigma_z = 1.0;
  double rho = 0.0;  // corr(w, z)
};

struct TuningBounds {
  std::size_t q_min = 2;
  std::optional<std::size_t> q_max;  // defaults to n
  double rho_clamp = 0.99;
};

// Sample mean and standard deviation (denominator n - 1) of z and the Pearson
// correlation of (w, z), clamped to [-rho_clamp, rho_clamp]. Needs at least
// three records and nonzero variance in both w and z.
TuningInputs estimate_moments(std::span<const ObservationPair> sample, double rho_clamp = 0.99);

// n^{1/2} (4 phi^2(z0) / [(2 / sigma) / sqrt(2 pi e) + |rho| / (sigma sqrt(1 - rho^2))
// / sqrt(2 pi)])^{2/3}, phi the N(mu_z, sigma_z^2) density, before rounding.
double rule_of_thumb_raw(const TuningInputs& t, double z0, double rho_clamp = 0.99);

// The raw value rounded to the nearest integer and clamped to [q_min, q_max].
std::size_t rule_of_thumb_q(const TuningInputs& t, double z0, const TuningBounds& bounds = {});

}  // namespace csd

#endif  // CSD_TUNING_HPP_
