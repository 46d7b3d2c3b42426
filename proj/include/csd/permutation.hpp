#ifndef CSD_PERMUTATION_HPP_
#define CSD_PERMUTATION_HPP_

#include "csd/nulldist.hpp"
#include "csd/types.hpp"

namespace csd {

// Distribution of the statistic over every way of relabelling q_y of the q
// pooled values as Y. Within each group the statistic ignores order, so the
// C(q, q_y) label assignments carry the same distribution as the q!
// permutations. Throws UnsupportedSizeError past kMaxEnumeration assignments;
// the data-independent critical value covers larger samples.
NullDistribution permutation_distribution(const EffectiveSample& s,
                                          StatisticKind kind = StatisticKind::kKs);

// Smallest value whose permutation CDF reaches 1 - alpha.
double permutation_critical_value(const EffectiveSample& s, double alpha,
                                  StatisticKind kind = StatisticKind::kKs);

}  // namespace csd

#endif  // CSD_PERMUTATION_HPP_
