#ifndef CSD_STATISTICS_HPP_
#define CSD_STATISTICS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "csd/types.hpp"

namespace csd {

// Right-continuous empirical CDF of a multiset: F(t) = #{points <= t} / count.
class Ecdf {
 public:
  explicit Ecdf(std::span<const double> points);

  double operator()(double t) const;
  std::size_t count() const noexcept { return sorted_.size(); }
  const std::vector<double>& sorted_points() const noexcept { return sorted_; }

 private:
  std::vector<double> sorted_;
};

// All one-sided two-sample statistics take the Y minus X orientation: large
// values are evidence that F_Y(t) > F_X(t) for some t.
//
// Values of F_Y - F_X are multiples of 1 / (q_y q_x). The KS statistic is
// computed on that lattice so that it compares bit-identically with
// critical values computed from the null distribution.
double lattice_value(std::int64_t numerator, std::size_t q_y, std::size_t q_x);

// Integer numerator k of the KS statistic k / (q_y q_x).
std::int64_t ks_numerator(std::span<const double> y, std::span<const double> x);

double ks_statistic(std::span<const double> y, std::span<const double> x);
double ks_statistic(const EffectiveSample& s);

// One-sided CvM statistic (1/q) sum_j (F_Y - F_X)^+ over the pooled points,
// where (v)^+ denotes the squared positive part max(v, 0)^2.
double cvm_statistic(std::span<const double> y, std::span<const double> x);
double cvm_statistic(const EffectiveSample& s);

// One-sided AD statistic: the CvM summands weighted by 1 / (F_S (1 - F_S)),
// F_S the pooled ECDF. Terms at which F_S = 1 are dropped; throws
// UndefinedStatisticError when every term is dropped.
double ad_statistic(std::span<const double> y, std::span<const double> x);
double ad_statistic(const EffectiveSample& s);

double compute_statistic(StatisticKind kind, std::span<const double> y,
                         std::span<const double> x);

}  // namespace csd

#endif  // CSD_STATISTICS_HPP_
