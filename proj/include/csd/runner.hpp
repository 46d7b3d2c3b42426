#ifndef CSD_RUNNER_HPP_
#define CSD_RUNNER_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csd/induced_order.hpp"
#include "csd/nulldist.hpp"
#include "csd/refined.hpp"
#include "csd/tuning.hpp"
#include "csd/types.hpp"

namespace csd {

enum class QMode { kAuto, kManual };

// kAuto uses the exact engine when q <= TestConfig::auto_exact_limit.
enum class CvMethod { kAuto, kExact, kMonteCarlo };

std::string_view to_string(CvMethod method);
CvMethod parse_cv_method(std::string_view name);

struct ManualQ {
  std::size_t q_y = 0;
  std::size_t q_x = 0;
};

struct ZMoments {
  double mu = 0.0;
  double sigma = 1.0;
};

struct TestConfig {
  double alpha = 0.05;
  std::vector<TargetPoint> targets;
  StatisticKind statistic = StatisticKind::kKs;
  QMode q_mode = QMode::kAuto;
  // One entry per target, or a single entry shared by all targets.
  std::vector<ManualQ> manual_q;
  CvMethod cv_method = CvMethod::kAuto;
  std::uint64_t mc_draws = 1'000'000;
  std::uint64_t mc_seed = 0;
  std::size_t auto_exact_limit = 500;
  std::optional<RefinedSpec> refined;
  // Replace refined->r by min(#distinct y, #distinct x) of each effective sample.
  bool estimate_refined_r = false;
  std::optional<double> rdd_cutoff;
  RddOrientation rdd_orientation = RddOrientation::kYAtOrBelow;
  TuningBounds tuning;
  // Covariate moments used by the tuning rule instead of each sample's own.
  std::optional<ZMoments> z_moments;
  std::size_t workers = 0;
};

struct TargetResult {
  TargetPoint target;
  std::size_t q_y = 0;
  std::size_t q_x = 0;
  double statistic_value = 0.0;
  double critical_value = 0.0;
  // Under the continuous-data null distribution even when the refined
  // critical value drives the decision.
  double p_value = 1.0;
  bool reject = false;  // statistic_value > critical_value
  double per_target_level = 0.0;
  double achieved_level = 0.0;
  NullMethod method = NullMethod::kExactDp;
  bool refined = false;
  std::size_t refined_r = 0;
  double default_critical_value = 0.0;  // KS only
  std::optional<TuningInputs> tuning_y;
  std::optional<TuningInputs> tuning_x;
  std::vector<std::size_t> y_indices;
  std::vector<std::size_t> x_indices;
  std::vector<std::string> warnings;
};

struct TestOutcome {
  std::vector<TargetResult> per_target;  // ascending target
  bool overall_reject = false;
  std::vector<std::string> warnings;
  std::map<std::string, std::string> metadata;
};

// 1 - (1 - alpha)^{1/L}; alpha itself when L = 1.
double per_target_level(double alpha, std::size_t targets);

TargetResult run_single_target(std::span<const ObservationPair> ysample,
                               std::span<const ObservationPair> xsample, TargetPoint target,
                               double level, const TestConfig& config);

TestOutcome run_multi_target(std::span<const ObservationPair> ysample,
                             std::span<const ObservationPair> xsample,
                             const TestConfig& config);

// Splits at config.rdd_cutoff and tests at the cutoff, or at config.targets
// when given. Unless config.z_moments is set, tuning uses the covariate mean
// and standard deviation of the whole sample.
TestOutcome run_rdd(std::span<const ObservationPair> sample, const TestConfig& config);

}  // namespace csd

#endif  // CSD_RUNNER_HPP_
