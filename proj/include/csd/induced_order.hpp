#ifndef CSD_INDUCED_ORDER_HPP_
#define CSD_INDUCED_ORDER_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "csd/types.hpp"

namespace csd {

// Positions (into `sample`) of the q records whose covariates are nearest z0,
// ordered by ascending (|z - z0|, index). Runs in O(n + q log q).
std::vector<std::size_t> g_order_positions(std::span<const ObservationPair> sample,
                                           double z0, std::size_t q);

// Outcomes paired with the q nearest covariates (the induced order
// statistics), in the same order as g_order_positions.
std::vector<double> g_order_select(std::span<const ObservationPair> sample, double z0,
                                   std::size_t q);

EffectiveSample build_effective_sample(std::span<const ObservationPair> ysample,
                                       std::span<const ObservationPair> xsample, double z0,
                                       std::size_t q_y, std::size_t q_x);

// Which side of the cutoff feeds the Y sample. The default follows the usual
// sharp RDD convention (Y: z <= cutoff, X: z > cutoff); kYAbove mirrors it
// (Y: z >= cutoff, X: z < cutoff).
enum class RddOrientation { kYAtOrBelow, kYAbove };

struct RddSplit {
  Sample ysample;
  Sample xsample;
};

RddSplit rdd_split(std::span<const ObservationPair> sample, double cutoff,
                   RddOrientation orientation = RddOrientation::kYAtOrBelow);

}  // namespace csd

#endif  // CSD_INDUCED_ORDER_HPP_
