#include "csd/statistics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "csd/errors.hpp"

namespace csd {

std::string_view to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::kKs:
      return "ks";
    case StatisticKind::kCvm:
      return "cvm";
    case StatisticKind::kAd:
      return "ad";
  }
  return "unknown";
}

StatisticKind parse_statistic_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "ks") return StatisticKind::kKs;
  if (lower == "cvm") return StatisticKind::kCvm;
  if (lower == "ad") return StatisticKind::kAd;
  throw InvalidParameterError("unknown statistic '" + std::string(name) +
                              "' (expected ks, cvm or ad)");
}

Ecdf::Ecdf(std::span<const double> points) : sorted_(points.begin(), points.end()) {
  if (sorted_.empty()) throw EmptyInputError("ECDF of an empty set");
  std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double t) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double lattice_value(std::int64_t numerator, std::size_t q_y, std::size_t q_x) {
  return static_cast<double>(numerator) /
         (static_cast<double>(q_y) * static_cast<double>(q_x));
}

namespace {

void require_both_sides(std::span<const double> y, std::span<const double> x) {
  if (y.empty() || x.empty()) {
    throw EmptyInputError("two-sample statistic needs q_y >= 1 and q_x >= 1");
  }
}

// One entry per distinct pooled value: counts at or below it, and how many
// pooled points carry that value.
struct TieGroup {
  std::int64_t cum_y;
  std::int64_t cum_x;
  std::int64_t size;
  bool has_y;
};

std::vector<TieGroup> tie_groups(std::span<const double> y, std::span<const double> x) {
  require_both_sides(y, x);
  std::vector<std::pair<double, bool>> pooled;
  pooled.reserve(y.size() + x.size());
  for (double v : y) pooled.emplace_back(v, true);
  for (double v : x) pooled.emplace_back(v, false);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<TieGroup> groups;
  std::int64_t cy = 0;
  std::int64_t cx = 0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    bool has_y = false;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) {
      if (pooled[j].second) {
        ++cy;
        has_y = true;
      } else {
        ++cx;
      }
      ++j;
    }
    groups.push_back({cy, cx, static_cast<std::int64_t>(j - i), has_y});
    i = j;
  }
  return groups;
}

}  // namespace

std::int64_t ks_numerator(std::span<const double> y, std::span<const double> x) {
  const auto qy = static_cast<std::int64_t>(y.size());
  const auto qx = static_cast<std::int64_t>(x.size());
  std::int64_t best = std::numeric_limits<std::int64_t>::min();
  for (const auto& g : tie_groups(y, x)) {
    if (!g.has_y) continue;
    best = std::max(best, g.cum_y * qx - g.cum_x * qy);
  }
  return best;
}

double ks_statistic(std::span<const double> y, std::span<const double> x) {
  return lattice_value(ks_numerator(y, x), y.size(), x.size());
}

double ks_statistic(const EffectiveSample& s) { return ks_statistic(s.y_values, s.x_values); }

namespace {

double squared_positive_part(std::int64_t numerator, std::size_t q_y, std::size_t q_x) {
  if (numerator <= 0) return 0.0;
  const double v = lattice_value(numerator, q_y, q_x);
  return v * v;
}

}  // namespace

double cvm_statistic(std::span<const double> y, std::span<const double> x) {
  const auto qy = static_cast<std::int64_t>(y.size());
  const auto qx = static_cast<std::int64_t>(x.size());
  double sum = 0.0;
  for (const auto& g : tie_groups(y, x)) {
    sum += static_cast<double>(g.size) *
           squared_positive_part(g.cum_y * qx - g.cum_x * qy, y.size(), x.size());
  }
  return sum / static_cast<double>(qy + qx);
}

double cvm_statistic(const EffectiveSample& s) {
  return cvm_statistic(s.y_values, s.x_values);
}

double ad_statistic(std::span<const double> y, std::span<const double> x) {
  const auto qy = static_cast<std::int64_t>(y.size());
  const auto qx = static_cast<std::int64_t>(x.size());
  const auto q = qy + qx;
  double sum = 0.0;
  bool any_term = false;
  for (const auto& g : tie_groups(y, x)) {
    const std::int64_t below = g.cum_y + g.cum_x;
    if (below == q) continue;  // F_S = 1: zero denominator
    any_term = true;
    const double fs = static_cast<double>(below) / static_cast<double>(q);
    sum += static_cast<double>(g.size) *
           squared_positive_part(g.cum_y * qx - g.cum_x * qy, y.size(), x.size()) /
           (fs * (1.0 - fs));
  }
  if (!any_term) {
    throw UndefinedStatisticError("AD statistic undefined: all pooled values coincide");
  }
  return sum / static_cast<double>(q);
}

double ad_statistic(const EffectiveSample& s) { return ad_statistic(s.y_values, s.x_values); }

double compute_statistic(StatisticKind kind, std::span<const double> y,
                         std::span<const double> x) {
  switch (kind) {
    case StatisticKind::kKs:
      return ks_statistic(y, x);
    case StatisticKind::kCvm:
      return cvm_statistic(y, x);
    case StatisticKind::kAd:
      return ad_statistic(y, x);
  }
  throw InvalidParameterError("unknown statistic kind");
}

}  // namespace csd
