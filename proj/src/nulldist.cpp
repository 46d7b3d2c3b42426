#include "csd/nulldist.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include "csd/errors.hpp"
#include "csd/parallel.hpp"
#include "csd/rng.hpp"
#include "csd/statistics.hpp"

namespace csd {

__extension__ typedef unsigned __int128 PathCount;

std::string_view to_string(NullMethod method) {
  switch (method) {
    case NullMethod::kExactDp:
      return "exact";
    case NullMethod::kMonteCarlo:
      return "monte_carlo";
    case NullMethod::kEnumeration:
      return "enumeration";
  }
  return "unknown";
}

void validate_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidParameterError("alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
}

double log2_binomial(std::size_t n, std::size_t k) {
  if (k > n) return -INFINITY;
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  return (std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0)) /
         std::log(2.0);
}

std::int64_t floor_numerator(double x, std::size_t q_y, std::size_t q_x) {
  const double v = x * static_cast<double>(q_y) * static_cast<double>(q_x);
  return static_cast<std::int64_t>(std::floor(v + 1e-9 * std::max(1.0, std::fabs(v))));
}

double NullDistribution::cdf_at(double x) const {
  const auto it = std::upper_bound(support.begin(), support.end(), x);
  if (it == support.begin()) return 0.0;
  return cdf[static_cast<std::size_t>(it - support.begin()) - 1];
}

double NullDistribution::prob_at_least(double t) const {
  const auto it = std::lower_bound(support.begin(), support.end(), t);
  if (it == support.begin()) return 1.0;
  return std::max(0.0, 1.0 - cdf[static_cast<std::size_t>(it - support.begin()) - 1]);
}

namespace {

void validate_sizes(std::size_t q_y, std::size_t q_x) {
  if (q_y == 0 || q_x == 0) {
    throw InvalidParameterError("q_y and q_x must both be at least 1");
  }
}

void validate_exact_sizes(std::size_t q_y, std::size_t q_x) {
  validate_sizes(q_y, q_x);
  if (q_y + q_x > kMaxExactTotal) {
    throw UnsupportedSizeError("exact null distribution supports q_y + q_x <= " +
                               std::to_string(kMaxExactTotal) + "; use Monte Carlo");
  }
}

std::int64_t denominator(std::size_t q_y, std::size_t q_x) {
  return static_cast<std::int64_t>(q_y) * static_cast<std::int64_t>(q_x);
}

std::int64_t ceil_numerator(double x, std::size_t q_y, std::size_t q_x) {
  const double v = x * static_cast<double>(denominator(q_y, q_x));
  return static_cast<std::int64_t>(std::ceil(v - 1e-9 * std::max(1.0, std::fabs(v))));
}

// Headroom covers the intermediate products in total_paths.
bool counts_fit(std::size_t q_y, std::size_t q_x) {
  return log2_binomial(q_y + q_x, q_y) + std::log2(static_cast<double>(q_y + q_x)) < 125.0;
}

// Number of monotone paths from (0,0) to (q_y,q_x) whose every vertex (i,j)
// satisfies i q_x - j q_y <= k.
PathCount count_paths(std::size_t q_y, std::size_t q_x, std::int64_t k) {
  const auto qy = static_cast<std::int64_t>(q_y);
  const auto qx = static_cast<std::int64_t>(q_x);
  std::vector<PathCount> row(q_x + 1, 0);
  for (std::int64_t i = 0; i <= qy; ++i) {
    for (std::int64_t j = 0; j <= qx; ++j) {
      const bool allowed = i * qx - j * qy <= k;
      PathCount v = 0;
      if (allowed) {
        if (i == 0 && j == 0) {
          v = 1;
        } else {
          v = (i > 0 ? row[j] : 0) + (j > 0 ? row[j - 1] : 0);
        }
      }
      row[j] = v;
    }
  }
  return row[q_x];
}

// Same event, propagating probabilities: from (i,j) the next uniform is a Y
// with probability (q_y - i) / (q - i - j).
double path_probability(std::size_t q_y, std::size_t q_x, std::int64_t k) {
  const auto qy = static_cast<std::int64_t>(q_y);
  const auto qx = static_cast<std::int64_t>(q_x);
  const double q = static_cast<double>(q_y + q_x);
  std::vector<double> row(q_x + 1, 0.0);
  for (std::int64_t i = 0; i <= qy; ++i) {
    for (std::int64_t j = 0; j <= qx; ++j) {
      double v = 0.0;
      if (i * qx - j * qy <= k) {
        if (i == 0 && j == 0) {
          v = 1.0;
        } else {
          const double remaining = q - static_cast<double>(i + j) + 1.0;
          if (i > 0) v += row[j] * static_cast<double>(qy - i + 1) / remaining;
          if (j > 0) v += row[j - 1] * static_cast<double>(qx - j + 1) / remaining;
        }
      }
      row[j] = v;
    }
  }
  return std::min(1.0, row[q_x]);
}

PathCount total_paths(std::size_t q_y, std::size_t q_x) {
  PathCount c = 1;
  const std::size_t q = q_y + q_x;
  const std::size_t k = std::min(q_y, q_x);
  for (std::size_t i = 1; i <= k; ++i) c = c * (q - k + i) / i;
  return c;
}

double cdf_at_numerator(std::size_t q_y, std::size_t q_x, std::int64_t k) {
  if (k < 0) return 0.0;
  if (k >= denominator(q_y, q_x)) return 1.0;
  if (counts_fit(q_y, q_x)) {
    const PathCount count = count_paths(q_y, q_x, k);
    const PathCount total = total_paths(q_y, q_x);
    // A single correctly rounded division, as an enumeration would do it.
    if (total < (static_cast<PathCount>(1) << 53)) {
      return static_cast<double>(count) / static_cast<double>(total);
    }
    return static_cast<double>(static_cast<long double>(count) /
                               static_cast<long double>(total));
  }
  return path_probability(q_y, q_x, k);
}

// Sorted non-negative numerators i q_x - j q_y.
std::vector<std::int64_t> nonnegative_levels(std::size_t q_y, std::size_t q_x) {
  const std::int64_t d = denominator(q_y, q_x);
  std::vector<char> seen(static_cast<std::size_t>(d) + 1, 0);
  for (std::size_t i = 0; i <= q_y; ++i) {
    for (std::size_t j = 0; j <= q_x; ++j) {
      const std::int64_t k = static_cast<std::int64_t>(i * q_x) - static_cast<std::int64_t>(j * q_y);
      if (k >= 0) seen[static_cast<std::size_t>(k)] = 1;
    }
  }
  std::vector<std::int64_t> out;
  for (std::int64_t k = 0; k <= d; ++k) {
    if (seen[static_cast<std::size_t>(k)]) out.push_back(k);
  }
  return out;
}

bool meets_level(double cdf, double alpha) { return cdf >= 1.0 - alpha - kLevelTolerance; }

}  // namespace

std::vector<double> support_of_delta(std::size_t q_y, std::size_t q_x) {
  validate_sizes(q_y, q_x);
  std::vector<std::int64_t> ks;
  ks.reserve((q_y + 1) * (q_x + 1));
  for (std::size_t i = 0; i <= q_y; ++i) {
    for (std::size_t j = 0; j <= q_x; ++j) {
      ks.push_back(static_cast<std::int64_t>(i * q_x) - static_cast<std::int64_t>(j * q_y));
    }
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  std::vector<double> out;
  out.reserve(ks.size());
  for (auto k : ks) out.push_back(lattice_value(k, q_y, q_x));
  return out;
}

double exact_sup_cdf(std::size_t q_y, std::size_t q_x, double x) {
  validate_exact_sizes(q_y, q_x);
  return cdf_at_numerator(q_y, q_x, floor_numerator(x, q_y, q_x));
}

NullDistribution exact_null_cdf(std::size_t q_y, std::size_t q_x) {
  validate_exact_sizes(q_y, q_x);
  const auto levels = nonnegative_levels(q_y, q_x);
  const double work = static_cast<double>(levels.size()) * static_cast<double>(q_y + 1) *
                      static_cast<double>(q_x + 1);
  if (work > 4e9) {
    throw UnsupportedSizeError(
        "full exact CDF table too large for (" + std::to_string(q_y) + ", " +
        std::to_string(q_x) + "); use exact_critical_value or Monte Carlo");
  }
  NullDistribution nd;
  nd.method = NullMethod::kExactDp;
  nd.q_y = q_y;
  nd.q_x = q_x;
  nd.support.reserve(levels.size());
  nd.cdf.reserve(levels.size());
  for (auto k : levels) {
    nd.support.push_back(lattice_value(k, q_y, q_x));
    nd.cdf.push_back(cdf_at_numerator(q_y, q_x, k));
  }
  nd.cdf.back() = 1.0;
  return nd;
}

namespace {

constexpr std::uint64_t kChunk = 16384;

template <typename DrawFn>
void chunked_draws(std::uint64_t draws, std::uint64_t seed, std::size_t workers, DrawFn&& fn) {
  const std::uint64_t chunks = (draws + kChunk - 1) / kChunk;
  parallel_for(static_cast<std::size_t>(chunks), workers, [&](std::size_t c) {
    Rng rng = make_stream(seed, c);
    const std::uint64_t begin = c * kChunk;
    const std::uint64_t end = std::min(draws, begin + kChunk);
    for (std::uint64_t d = begin; d < end; ++d) fn(rng, d);
  });
}

}  // namespace

NullDistribution mc_null_cdf(std::size_t q_y, std::size_t q_x, std::uint64_t draws,
                             std::uint64_t seed, std::size_t workers) {
  validate_sizes(q_y, q_x);
  if (draws == 0) throw InvalidParameterError("Monte Carlo null needs draws >= 1");
  const auto qy = static_cast<std::int64_t>(q_y);
  const auto qx = static_cast<std::int64_t>(q_x);

  std::vector<std::int64_t> nums(draws);
  chunked_draws(draws, seed, workers, [&](Rng& rng, std::uint64_t d) {
    // Only the order of the q uniforms matters, so draw the interleaving
    // directly: the next point is a Y with probability (Y left) / (all left).
    std::int64_t ry = qy;
    std::int64_t left = qy + qx;
    std::int64_t level = 0;
    std::int64_t best = 0;
    while (ry > 0 && level + ry * qx > best) {
      const auto pick = static_cast<std::int64_t>(
          (static_cast<PathCount>(rng()) * static_cast<std::uint64_t>(left)) >> 64);
      if (pick < ry) {
        level += qx;
        --ry;
        best = std::max(best, level);
      } else {
        level -= qy;
      }
      --left;
    }
    nums[d] = best;
  });

  std::sort(nums.begin(), nums.end());
  NullDistribution nd;
  nd.method = NullMethod::kMonteCarlo;
  nd.q_y = q_y;
  nd.q_x = q_x;
  nd.draws = draws;
  nd.seed = seed;
  const double total = static_cast<double>(draws);
  for (std::size_t i = 0; i < nums.size();) {
    std::size_t j = i;
    while (j < nums.size() && nums[j] == nums[i]) ++j;
    nd.support.push_back(lattice_value(nums[i], q_y, q_x));
    nd.cdf.push_back(static_cast<double>(j) / total);
    i = j;
  }
  nd.cdf.back() = 1.0;
  return nd;
}

double critical_value(const NullDistribution& nd, double alpha) {
  validate_alpha(alpha);
  if (nd.support.empty()) throw EmptyInputError("empty null distribution");
  for (std::size_t k = 0; k < nd.support.size(); ++k) {
    if (meets_level(nd.cdf[k], alpha)) return nd.support[k];
  }
  return nd.support.back();
}

double achieved_level(const NullDistribution& nd, double alpha) {
  const double c = critical_value(nd, alpha);
  return std::max(0.0, 1.0 - nd.cdf_at(c));
}

double p_value(const NullDistribution& nd, double t_obs) {
  if (!std::isfinite(t_obs)) throw InvalidParameterError("observed statistic must be finite");
  return nd.prob_at_least(t_obs);
}

namespace {

std::mutex cv_cache_mutex;
std::map<std::tuple<std::size_t, std::size_t, double>, std::int64_t> cv_cache;

std::int64_t exact_critical_numerator(std::size_t q_y, std::size_t q_x, double alpha) {
  const auto key = std::make_tuple(q_y, q_x, alpha);
  {
    std::lock_guard<std::mutex> lock(cv_cache_mutex);
    const auto it = cv_cache.find(key);
    if (it != cv_cache.end()) return it->second;
  }
  const auto levels = nonnegative_levels(q_y, q_x);
  // cdf is nondecreasing over levels and equals 1 at the last one.
  std::size_t lo = 0;
  std::size_t hi = levels.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (meets_level(cdf_at_numerator(q_y, q_x, levels[mid]), alpha)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  std::lock_guard<std::mutex> lock(cv_cache_mutex);
  cv_cache.emplace(key, levels[lo]);
  return levels[lo];
}

}  // namespace

double exact_critical_value(std::size_t q_y, std::size_t q_x, double alpha) {
  validate_alpha(alpha);
  validate_exact_sizes(q_y, q_x);
  return lattice_value(exact_critical_numerator(q_y, q_x, alpha), q_y, q_x);
}

double exact_achieved_level(std::size_t q_y, std::size_t q_x, double alpha) {
  validate_alpha(alpha);
  validate_exact_sizes(q_y, q_x);
  const auto k = exact_critical_numerator(q_y, q_x, alpha);
  return std::max(0.0, 1.0 - cdf_at_numerator(q_y, q_x, k));
}

double exact_p_value(std::size_t q_y, std::size_t q_x, double t_obs) {
  validate_exact_sizes(q_y, q_x);
  if (!std::isfinite(t_obs)) throw InvalidParameterError("observed statistic must be finite");
  if (t_obs <= 0.0) return 1.0;
  const std::int64_t k = ceil_numerator(t_obs, q_y, q_x);
  return std::max(0.0, 1.0 - cdf_at_numerator(q_y, q_x, k - 1));
}

double limiting_critical_value(double alpha) {
  validate_alpha(alpha);
  return std::sqrt(-std::log(alpha) / 2.0);
}

NullDistribution distribution_from_values(std::vector<double> values) {
  if (values.empty()) throw EmptyInputError("no values to build a distribution from");
  std::sort(values.begin(), values.end());
  NullDistribution nd;
  const double total = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i + 1;
    while (j < values.size() &&
           values[j] - values[i] <= 1e-12 * std::max(1.0, std::fabs(values[j]))) {
      ++j;
    }
    nd.support.push_back(values[j - 1]);
    nd.cdf.push_back(static_cast<double>(j) / total);
    i = j;
  }
  nd.cdf.back() = 1.0;
  return nd;
}

NullDistribution enumerated_null(StatisticKind kind, std::size_t q_y, std::size_t q_x) {
  validate_sizes(q_y, q_x);
  const std::size_t q = q_y + q_x;
  if (log2_binomial(q, q_y) > std::log2(static_cast<double>(kMaxEnumeration))) {
    throw UnsupportedSizeError("C(" + std::to_string(q) + ", " + std::to_string(q_y) +
                               ") labelings exceed the enumeration limit");
  }
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
        y[yi++] = static_cast<double>(r);
      } else {
        x[xi++] = static_cast<double>(r);
      }
    }
    values.push_back(compute_statistic(kind, y, x));
    // next combination in lexicographic order
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

NullDistribution mc_statistic_null(StatisticKind kind, std::size_t q_y, std::size_t q_x,
                                   std::uint64_t draws, std::uint64_t seed,
                                   std::size_t workers) {
  validate_sizes(q_y, q_x);
  if (draws == 0) throw InvalidParameterError("Monte Carlo null needs draws >= 1");
  std::vector<double> values(draws);
  chunked_draws(draws, seed, workers, [&](Rng& rng, std::uint64_t d) {
    thread_local std::vector<double> y;
    thread_local std::vector<double> x;
    y.resize(q_y);
    x.resize(q_x);
    for (auto& v : y) v = uniform01(rng);
    for (auto& v : x) v = uniform01(rng);
    values[d] = compute_statistic(kind, y, x);
  });
  NullDistribution nd = distribution_from_values(std::move(values));
  nd.method = NullMethod::kMonteCarlo;
  nd.statistic = kind;
  nd.q_y = q_y;
  nd.q_x = q_x;
  nd.draws = draws;
  nd.seed = seed;
  return nd;
}

}  // namespace csd
