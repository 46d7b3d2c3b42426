#ifndef CSD_SIMBENCH_HPP_
#define CSD_SIMBENCH_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csd/refined.hpp"
#include "csd/rng.hpp"
#include "csd/runner.hpp"
#include "csd/types.hpp"

namespace csd {

// Simulation designs 1-7, cases a-d:
//   a  null holds with equality, one target
//   b  null holds strictly, one target
//   c  null holds with equality, targets 0.25 and 0.75 (-0.5 and 0.5 for design 4)
//   d  null violated, one target
// Designs 1-3 and 5 are location-scale models Y = mu_Y(Z) + sigma_Y(Z) U,
// X = mu_X(Z) + sigma_X(Z) V with Z ~ Beta(2, 2). Design 4 is a sharp RDD with
// Z ~ 2 Beta(2, 2) - 1, Y observed for Z >= 0 and X for Z < 0. Design 6 has
// three categories with softmax probabilities, design 7 binomial outcomes.
struct DesignSpec {
  int design = 1;
  char case_id = 'a';
  std::size_t n = 1000;
};

void validate_design(const DesignSpec& spec);
DesignSpec parse_design(int design, const std::string& case_id, std::size_t n);

std::vector<double> design_targets(const DesignSpec& spec);

// Smallest of the Y and X support sizes of the conditional law at z0
// (designs 6 and 7 only).
std::size_t design_support_size(const DesignSpec& spec, double z0);

// Conditional CDF of the Y outcome at covariate z (designs 1-5).
double design_y_cdf(const DesignSpec& spec, double z, double t);

struct DesignDraw {
  Sample ysample;
  Sample xsample;
  Sample pooled;  // design 4 only
  bool rdd = false;
  double cutoff = 0.0;
};

// For design 4, n is the size of the pooled sample; otherwise each of the two
// samples has n records.
DesignDraw draw_design(const DesignSpec& spec, Rng& rng);

struct SimOptions {
  StatisticKind statistic = StatisticKind::kKs;
  // Refined KS test; r defaults to design_support_size at the targets.
  bool refined = false;
  RefinedSpec refined_spec{1, 0, 30, 200};
  std::optional<std::size_t> refined_r;
  std::optional<ManualQ> manual_q;
  std::size_t workers = 0;
  double max_failure_rate = 0.01;
};

struct SimResult {
  DesignSpec spec;
  double alpha = 0.0;
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
  double rejection_rate = 0.0;
  double se = 0.0;
  double mean_q_y = 0.0;  // over replications and targets
  double mean_q_x = 0.0;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;  // first few
  std::vector<double> targets;
  std::vector<double> per_target_rejection;
  std::vector<double> per_target_mean_q_y;
  std::vector<double> per_target_mean_q_x;
  // With the refined test: the same replications decided by the default
  // critical value, and how often default rejected while refined did not.
  std::optional<double> default_rejection_rate;
  std::size_t dominance_violations = 0;
};

// Replication i draws from make_stream(seed, i), so the result does not
// depend on the worker count. A failed replication is counted and skipped;
// more than max_failure_rate of them aborts the run.
SimResult run_monte_carlo(const DesignSpec& spec, double alpha, std::uint64_t reps,
                          std::uint64_t seed, const SimOptions& options = {});

struct DiscreteDistribution {
  std::vector<double> values;
  std::vector<double> probs;
};

struct LimitExperimentResult {
  double rejection_rate = 0.0;
  double se = 0.0;
  double critical_value = 0.0;
  std::size_t undefined = 0;  // AD draws with no defined term, counted as no rejection
};

// Applies the test to q_y draws from dist_y and q_x draws from dist_x,
// i.e. directly to the limit of the effective sample.
LimitExperimentResult limit_experiment_check(const DiscreteDistribution& dist_y,
                                             const DiscreteDistribution& dist_x,
                                             std::size_t q_y, std::size_t q_x,
                                             StatisticKind kind, double alpha,
                                             std::uint64_t reps, std::uint64_t seed);

// Sup distance between the empirical law, across replications, of the Y
// value attached to the covariate nearest z0 and the true conditional CDF
// of Y at z0 (designs 1-5, non-RDD).
double induced_convergence_distance(const DesignSpec& spec, double z0, std::uint64_t reps,
                                    std::uint64_t seed, std::size_t workers = 0);

}  // namespace csd

#endif  // CSD_SIMBENCH_HPP_
