#include "csd/permutation.hpp"

#include <cmath>
#include <string>

#include "csd/errors.hpp"
#include "csd/statistics.hpp"

namespace csd {

NullDistribution permutation_distribution(const EffectiveSample& s, StatisticKind kind) {
  const std::size_t q_y = s.q_y();
  const std::size_t q_x = s.q_x();
  if (q_y == 0 || q_x == 0) throw EmptyInputError("effective sample needs q_y, q_x >= 1");
  const std::size_t q = q_y + q_x;
  if (log2_binomial(q, q_y) > std::log2(static_cast<double>(kMaxEnumeration))) {
    throw UnsupportedSizeError("permutation critical value needs C(" + std::to_string(q) +
                               ", " + std::to_string(q_y) +
                               ") label assignments; use the data-independent critical value");
  }
  std::vector<double> pooled(s.y_values);
  pooled.insert(pooled.end(), s.x_values.begin(), s.x_values.end());

  std::vector<double> values;
  std::vector<std::size_t> pick(q_y);
  for (std::size_t i = 0; i < q_y; ++i) pick[i] = i;
  std::vector<double> y(q_y);
  std::vector<double> x(q_x);
  for (;;) {
    std::size_t yi = 0;
    std::size_t xi = 0;
    for (std::size_t r = 0; r < q; ++r) {
      if (yi < q_y && pick[yi] == r) {
        y[yi++] = pooled[r];
      } else {
        x[xi++] = pooled[r];
      }
    }
    values.push_back(compute_statistic(kind, y, x));
    std::size_t i = q_y;
    while (i > 0 && pick[i - 1] == q - q_y + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t k = i; k < q_y; ++k) pick[k] = pick[k - 1] + 1;
  }
  NullDistribution nd = distribution_from_values(std::move(values));
  nd.method = NullMethod::kEnumeration;
  nd.statistic = kind;
  nd.q_y = q_y;
  nd.q_x = q_x;
  return nd;
}

double permutation_critical_value(const EffectiveSample& s, double alpha, StatisticKind kind) {
  validate_alpha(alpha);
  return critical_value(permutation_distribution(s, kind), alpha);
}

}  // namespace csd
