#include "csd/induced_order.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "csd/errors.hpp"

namespace csd {

namespace {

struct Key {
  double distance;
  std::size_t index;
  std::size_t position;
};

bool key_less(const Key& a, const Key& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.index < b.index;
}

}  // namespace

std::vector<std::size_t> g_order_positions(std::span<const ObservationPair> sample,
                                           double z0, std::size_t q) {
  if (sample.empty()) throw EmptyInputError("g-order selection on an empty sample");
  if (q == 0 || q > sample.size()) {
    throw InvalidParameterError("g-order selection needs 1 <= q <= " +
                                std::to_string(sample.size()) + ", got q = " +
                                std::to_string(q));
  }
  if (!std::isfinite(z0)) throw InvalidParameterError("target point must be finite");

  std::vector<Key> keys;
  keys.reserve(sample.size());
  for (std::size_t pos = 0; pos < sample.size(); ++pos) {
    const auto& obs = sample[pos];
    if (!std::isfinite(obs.w) || !std::isfinite(obs.z)) {
      throw InvalidParameterError("non-finite observation at index " +
                                  std::to_string(obs.index));
    }
    keys.push_back({std::abs(obs.z - z0), obs.index, pos});
  }

  if (q < keys.size()) {
    std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(q) - 1,
                     keys.end(), key_less);
    keys.resize(q);
  }
  std::sort(keys.begin(), keys.end(), key_less);

  std::vector<std::size_t> positions;
  positions.reserve(q);
  for (const auto& k : keys) positions.push_back(k.position);
  return positions;
}

std::vector<double> g_order_select(std::span<const ObservationPair> sample, double z0,
                                   std::size_t q) {
  std::vector<double> out;
  for (std::size_t pos : g_order_positions(sample, z0, q)) out.push_back(sample[pos].w);
  return out;
}

EffectiveSample build_effective_sample(std::span<const ObservationPair> ysample,
                                       std::span<const ObservationPair> xsample, double z0,
                                       std::size_t q_y, std::size_t q_x) {
  EffectiveSample s;
  s.target.z0 = z0;
  for (std::size_t pos : g_order_positions(ysample, z0, q_y)) {
    s.y_values.push_back(ysample[pos].w);
    s.y_indices.push_back(ysample[pos].index);
  }
  for (std::size_t pos : g_order_positions(xsample, z0, q_x)) {
    s.x_values.push_back(xsample[pos].w);
    s.x_indices.push_back(xsample[pos].index);
  }
  return s;
}

RddSplit rdd_split(std::span<const ObservationPair> sample, double cutoff,
                   RddOrientation orientation) {
  if (sample.empty()) throw EmptyInputError("RDD split on an empty sample");
  RddSplit split;
  for (const auto& obs : sample) {
    const bool to_y = orientation == RddOrientation::kYAtOrBelow ? obs.z <= cutoff
                                                                  : obs.z >= cutoff;
    (to_y ? split.ysample : split.xsample).push_back(obs);
  }
  if (split.ysample.empty()) {
    throw DegenerateSplitError("Y", "RDD split leaves the Y side empty at cutoff " +
                                        std::to_string(cutoff));
  }
  if (split.xsample.empty()) {
    throw DegenerateSplitError("X", "RDD split leaves the X side empty at cutoff " +
                                        std::to_string(cutoff));
  }
  return split;
}

}  // namespace csd
