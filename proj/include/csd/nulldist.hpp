#ifndef CSD_NULLDIST_HPP_
#define CSD_NULLDIST_HPP_

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "csd/types.hpp"

namespace csd {

// Null distribution of sup_u Delta(u), where Delta(u) is the difference of the
// ECDFs of q_y and q_x i.i.d. U(0,1) variables. Every interleaving of the two
// groups of uniforms is equally likely and the supremum depends on nothing
// else, so the distribution is that of the running maximum of a uniformly
// random monotone lattice path from (0, 0) to (q_y, q_x), where a Y step adds
// 1/q_y and an X step subtracts 1/q_x. The start vertex contributes 0, so the
// supremum is never negative.

enum class NullMethod { kExactDp, kMonteCarlo, kEnumeration };

std::string_view to_string(NullMethod method);

// Comparisons of a CDF value against 1 - alpha accept this much slack so that
// atoms whose mass is exactly 1 - alpha are not lost to rounding.
inline constexpr double kLevelTolerance = 1e-12;

// Largest q = q_y + q_x accepted by the exact lattice-path engine.
inline constexpr std::size_t kMaxExactTotal = 2000;

struct NullDistribution {
  std::vector<double> support;  // ascending
  std::vector<double> cdf;      // P{stat <= support[k]}, last entry 1
  NullMethod method = NullMethod::kExactDp;
  StatisticKind statistic = StatisticKind::kKs;
  std::size_t q_y = 0;
  std::size_t q_x = 0;
  std::uint64_t draws = 0;  // Monte Carlo only
  std::uint64_t seed = 0;   // Monte Carlo only

  // Right-continuous step function P{stat <= x}.
  double cdf_at(double x) const;
  // P{stat >= t}.
  double prob_at_least(double t) const;
};

// {i/q_y - j/q_x : 0 <= i <= q_y, 0 <= j <= q_x}, deduplicated and sorted.
std::vector<double> support_of_delta(std::size_t q_y, std::size_t q_x);

// P{sup_u Delta(u) <= x} by a single lattice-path pass, O(q_y q_x).
// Exact integer path counts are used while C(q, q_y) fits in 128-bit words;
// beyond that the pass propagates path probabilities in double precision.
double exact_sup_cdf(std::size_t q_y, std::size_t q_x, double x);

// Full CDF at every non-negative support point. Cost grows like
// (number of support points) * q_y * q_x; throws UnsupportedSizeError past
// a few billion lattice updates.
NullDistribution exact_null_cdf(std::size_t q_y, std::size_t q_x);

// Empirical CDF of the supremum over `draws` replications, each a fresh
// random interleaving of q uniforms. Deterministic in `seed` for any worker
// count.
NullDistribution mc_null_cdf(std::size_t q_y, std::size_t q_x, std::uint64_t draws,
                             std::uint64_t seed, std::size_t workers = 0);

// Smallest support value x with cdf(x) >= 1 - alpha.
double critical_value(const NullDistribution& nd, double alpha);

// P{stat > critical_value(nd, alpha)}; never above alpha.
double achieved_level(const NullDistribution& nd, double alpha);

// P{stat >= t_obs}. Decisions use T > c, not p <= alpha; the two agree except
// when T sits exactly on an atom with the p <= alpha boundary inside it.
double p_value(const NullDistribution& nd, double t_obs);

// Same quantities straight from the lattice-path engine without building the
// whole table: the critical value is found by bisection over the support.
double exact_critical_value(std::size_t q_y, std::size_t q_x, double alpha);
double exact_achieved_level(std::size_t q_y, std::size_t q_x, double alpha);
double exact_p_value(std::size_t q_y, std::size_t q_x, double t_obs);

// Critical value of sqrt(q_y q_x / q) * T in the q -> infinity limit:
// sqrt(-ln(alpha) / 2).
double limiting_critical_value(double alpha);

// Null distribution of any statistic kind under continuous data by visiting
// all C(q, q_y) rank labelings; throws UnsupportedSizeError past
// kMaxEnumeration labelings.
inline constexpr std::uint64_t kMaxEnumeration = 5'000'000;
NullDistribution enumerated_null(StatisticKind kind, std::size_t q_y, std::size_t q_x);

// Monte Carlo null of any statistic kind from i.i.d. uniforms.
NullDistribution mc_statistic_null(StatisticKind kind, std::size_t q_y, std::size_t q_x,
                                   std::uint64_t draws, std::uint64_t seed,
                                   std::size_t workers = 0);

// log C(n, k) in base 2.
double log2_binomial(std::size_t n, std::size_t k);

// Rebuilds a distribution from (value, count) observations; values closer than
// a relative 1e-12 are merged onto the largest of them.
NullDistribution distribution_from_values(std::vector<double> values);

void validate_alpha(double alpha);

// Largest integer k with k / (q_y q_x) <= x, tolerant of the rounding in x
// when x came from lattice_value.
std::int64_t floor_numerator(double x, std::size_t q_y, std::size_t q_x);

}  // namespace csd

#endif  // CSD_NULLDIST_HPP_
