#ifndef CSD_REFINED_HPP_
#define CSD_REFINED_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace csd {

// When the outcomes take at most r distinct values, the KS statistic only
// looks at Delta(u) on r points of (0, 1), so the 1 - alpha quantile of
// max_k Delta(u_k), taken in the worst case over ordered r-tuples, is a valid
// and smaller critical value.
struct RefinedSpec {
  std::size_t r = 1;
  // Points per coordinate of the search grid {g / (m + 1)}. 0 picks the
  // largest m <= 101 whose C(m, r) ordered tuples fit in max_grid_tuples.
  std::size_t grid_resolution = 0;
  std::size_t refinement_iterations = 50;
  std::size_t max_grid_tuples = 2000;
};

struct RefinedResult {
  double critical_value = 0.0;
  double lower_bound = 0.0;  // quantile at the equally spaced tuple
  double upper_bound = 0.0;  // continuous-data critical value
  std::vector<double> worst_tuple;
  double worst_probability = 1.0;  // inf over searched tuples at the result
  std::size_t grid_resolution = 0;
  std::size_t evaluations = 0;
  std::vector<std::string> warnings;
};

// P{max_k Delta(u_k) <= x} for a strictly increasing tuple in (0, 1),
// summing over the joint binomial counts of Y and X uniforms below each u_k.
double tuple_cdf(std::size_t q_y, std::size_t q_x, std::span<const double> u, double x);

// Grid resolution the search uses for a spec.
std::size_t effective_grid_resolution(const RefinedSpec& spec);

// Results are memoised per (q_y, q_x, alpha, spec).
RefinedResult refined_critical_value(std::size_t q_y, std::size_t q_x, double alpha,
                                     const RefinedSpec& spec = {});

}  // namespace csd

#endif  // CSD_REFINED_HPP_
