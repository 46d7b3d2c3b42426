#ifndef CSD_TYPES_HPP_
#define CSD_TYPES_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace csd {

// One record of a sample: outcome `w` observed together with covariate `z`.
// `index` is the 0-based position in the original file or draw and is what
// breaks ties between equally distant covariates.
struct ObservationPair {
  double w = 0.0;
  double z = 0.0;
  std::size_t index = 0;
};

using Sample = std::vector<ObservationPair>;

struct TargetPoint {
  double z0 = 0.0;
};

// Pooled effective sample at one target: the outcomes attached to the q_y
// (q_x) covariates nearest the target, nearest first.
struct EffectiveSample {
  std::vector<double> y_values;
  std::vector<double> x_values;
  TargetPoint target;
  // Original indices of the selected records, aligned with the values.
  std::vector<std::size_t> y_indices;
  std::vector<std::size_t> x_indices;

  std::size_t q_y() const noexcept { return y_values.size(); }
  std::size_t q_x() const noexcept { return x_values.size(); }
  std::size_t q() const noexcept { return y_values.size() + x_values.size(); }
};

enum class StatisticKind { kKs, kCvm, kAd };

std::string_view to_string(StatisticKind kind);
StatisticKind parse_statistic_kind(std::string_view name);

}  // namespace csd

#endif  // CSD_TYPES_HPP_
