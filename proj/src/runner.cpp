#include "csd/runner.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <tuple>

#include "csd/errors.hpp"
#include "csd/statistics.hpp"
#include "csd/version.hpp"

namespace csd {

std::string_view to_string(CvMethod method) {
  switch (method) {
    case CvMethod::kAuto:
      return "auto";
    case CvMethod::kExact:
      return "exact";
    case CvMethod::kMonteCarlo:
      return "mc";
  }
  return "unknown";
}

CvMethod parse_cv_method(std::string_view name) {
  if (name == "auto") return CvMethod::kAuto;
  if (name == "exact") return CvMethod::kExact;
  if (name == "mc" || name == "monte_carlo") return CvMethod::kMonteCarlo;
  throw InvalidParameterError("unknown critical-value method '" + std::string(name) +
                              "' (expected auto, exact or mc)");
}

double per_target_level(double alpha, std::size_t targets) {
  validate_alpha(alpha);
  if (targets == 0) throw InvalidParameterError("at least one target is required");
  if (targets == 1) return alpha;
  return 1.0 - std::pow(1.0 - alpha, 1.0 / static_cast<double>(targets));
}

namespace {

using NullKey = std::tuple<int, std::size_t, std::size_t, std::uint64_t, std::uint64_t>;
std::mutex null_cache_mutex;
std::map<NullKey, std::shared_ptr<const NullDistribution>> null_cache;

std::shared_ptr<const NullDistribution> cached_null(StatisticKind kind, std::size_t q_y,
                                                    std::size_t q_x, bool enumerate,
                                                    std::uint64_t draws, std::uint64_t seed,
                                                    std::size_t workers) {
  const NullKey key{static_cast<int>(kind), q_y, q_x, enumerate ? 0 : draws,
                    enumerate ? 0 : seed};
  {
    std::lock_guard<std::mutex> lock(null_cache_mutex);
    const auto it = null_cache.find(key);
    if (it != null_cache.end()) return it->second;
  }
  std::shared_ptr<const NullDistribution> nd;
  if (enumerate) {
    nd = std::make_shared<NullDistribution>(enumerated_null(kind, q_y, q_x));
  } else if (kind == StatisticKind::kKs) {
    nd = std::make_shared<NullDistribution>(mc_null_cdf(q_y, q_x, draws, seed, workers));
  } else {
    nd = std::make_shared<NullDistribution>(
        mc_statistic_null(kind, q_y, q_x, draws, seed, workers));
  }
  std::lock_guard<std::mutex> lock(null_cache_mutex);
  null_cache.emplace(key, nd);
  return nd;
}

std::size_t distinct_count(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

TuningInputs tuning_inputs(std::span<const ObservationPair> sample, const TestConfig& config) {
  TuningInputs t = estimate_moments(sample, config.tuning.rho_clamp);
  if (config.z_moments) {
    t.mu_z = config.z_moments->mu;
    t.sigma_z = config.z_moments->sigma;
  }
  return t;
}

std::size_t tuned_q(const TuningInputs& t, double z0, const TestConfig& config) {
  TuningBounds b = config.tuning;
  b.q_max = std::min(b.q_max.value_or(t.n), t.n);
  b.q_min = std::min(b.q_min, *b.q_max);
  return rule_of_thumb_q(t, z0, b);
}

std::string target_context(double z0) {
  std::ostringstream os;
  os.precision(17);
  os << "target z0=" << z0 << ": ";
  return os.str();
}

const char* kContinuityWarning =
    "CvM and AD critical values assume continuously distributed outcomes; the test can "
    "over-reject with ties, and validity of AD is not established";

void fill_ks_critical_value(TargetResult& res, double level, const TestConfig& config) {
  const std::size_t q = res.q_y + res.q_x;
  const bool exact = config.cv_method == CvMethod::kExact ||
                     (config.cv_method == CvMethod::kAuto && q <= config.auto_exact_limit);
  if (exact) {
    res.method = NullMethod::kExactDp;
    res.critical_value = exact_critical_value(res.q_y, res.q_x, level);
    res.achieved_level = exact_achieved_level(res.q_y, res.q_x, level);
    res.p_value = exact_p_value(res.q_y, res.q_x, res.statistic_value);
  } else {
    const auto nd = cached_null(StatisticKind::kKs, res.q_y, res.q_x, false, config.mc_draws,
                                config.mc_seed, config.workers);
    res.method = NullMethod::kMonteCarlo;
    res.critical_value = critical_value(*nd, level);
    res.achieved_level = achieved_level(*nd, level);
    res.p_value = p_value(*nd, res.statistic_value);
  }
  res.default_critical_value = res.critical_value;
}

void fill_rank_statistic_critical_value(TargetResult& res, double level,
                                        const TestConfig& config, StatisticKind kind) {
  const double log2_labelings = log2_binomial(res.q_y + res.q_x, res.q_y);
  bool enumerate = false;
  switch (config.cv_method) {
    case CvMethod::kExact:
      if (log2_labelings > std::log2(static_cast<double>(kMaxEnumeration))) {
        throw UnsupportedSizeError("exact CvM/AD null needs at most " +
                                   std::to_string(kMaxEnumeration) + " rank labelings");
      }
      enumerate = true;
      break;
    case CvMethod::kAuto:
      enumerate = log2_labelings <= std::log2(2e5);
      break;
    case CvMethod::kMonteCarlo:
      break;
  }
  const auto nd = cached_null(kind, res.q_y, res.q_x, enumerate, config.mc_draws,
                              config.mc_seed, config.workers);
  res.method = nd->method;
  res.critical_value = critical_value(*nd, level);
  res.achieved_level = achieved_level(*nd, level);
  res.p_value = p_value(*nd, res.statistic_value);
}

TargetResult run_single_target_impl(std::span<const ObservationPair> ysample,
                                    std::span<const ObservationPair> xsample,
                                    TargetPoint target, double level,
                                    const TestConfig& config) {
  if (ysample.empty()) throw EmptyInputError("Y sample is empty");
  if (xsample.empty()) throw EmptyInputError("X sample is empty");
  if (!std::isfinite(target.z0)) throw InvalidParameterError("target must be finite");

  TargetResult res;
  res.target = target;
  res.per_target_level = level;

  std::size_t q_y = 0;
  std::size_t q_x = 0;
  if (config.q_mode == QMode::kManual) {
    if (config.manual_q.empty()) {
      throw InvalidParameterError("manual q mode needs q_y and q_x");
    }
    const auto it = std::find_if(config.targets.begin(), config.targets.end(),
                                 [&](const TargetPoint& t) { return t.z0 == target.z0; });
    std::size_t slot = 0;
    if (config.manual_q.size() > 1) {
      if (it == config.targets.end() || config.manual_q.size() != config.targets.size()) {
        throw InvalidParameterError("manual q needs one (q_y, q_x) pair per target");
      }
      slot = static_cast<std::size_t>(it - config.targets.begin());
    }
    q_y = config.manual_q[slot].q_y;
    q_x = config.manual_q[slot].q_x;
  } else {
    res.tuning_y = tuning_inputs(ysample, config);
    res.tuning_x = tuning_inputs(xsample, config);
    q_y = tuned_q(*res.tuning_y, target.z0, config);
    q_x = tuned_q(*res.tuning_x, target.z0, config);
  }

  const EffectiveSample es = build_effective_sample(ysample, xsample, target.z0, q_y, q_x);
  res.q_y = es.q_y();
  res.q_x = es.q_x();
  res.y_indices = es.y_indices;
  res.x_indices = es.x_indices;
  res.statistic_value = compute_statistic(config.statistic, es.y_values, es.x_values);

  if (config.statistic == StatisticKind::kKs) {
    fill_ks_critical_value(res, level, config);
    if (config.refined) {
      RefinedSpec spec = *config.refined;
      if (config.estimate_refined_r) {
        spec.r = std::max<std::size_t>(
            1, std::min(distinct_count(es.y_values), distinct_count(es.x_values)));
      }
      const RefinedResult rr = refined_critical_value(res.q_y, res.q_x, level, spec);
      res.refined = true;
      res.refined_r = spec.r;
      res.critical_value = std::min(rr.critical_value, res.default_critical_value);
      for (const auto& w : rr.warnings) res.warnings.push_back(w);
    }
  } else {
    if (config.refined) {
      res.warnings.push_back("refined critical value applies to the KS statistic only; ignored");
    }
    fill_rank_statistic_critical_value(res, level, config, config.statistic);
    res.warnings.push_back(kContinuityWarning);
  }
  res.reject = res.statistic_value > res.critical_value;
  return res;
}

template <typename E>
[[noreturn]] void rethrow_in_context(const E& e, double z0) {
  throw E(target_context(z0) + e.what());
}

std::string join_indices(const std::vector<std::size_t>& v) {
  std::ostringstream os;
  const std::size_t shown = std::min<std::size_t>(v.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) os << (i ? "," : "") << v[i];
  if (v.size() > shown) os << ",... (" << v.size() << " total)";
  return os.str();
}

std::vector<std::size_t> shared(std::vector<std::size_t> a, std::vector<std::size_t> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

TargetResult run_single_target(std::span<const ObservationPair> ysample,
                               std::span<const ObservationPair> xsample, TargetPoint target,
                               double level, const TestConfig& config) {
  validate_alpha(level);
  try {
    return run_single_target_impl(ysample, xsample, target, level, config);
  } catch (const InvalidParameterError& e) {
    rethrow_in_context(e, target.z0);
  } catch (const EmptyInputError& e) {
    rethrow_in_context(e, target.z0);
  } catch (const DegenerateMomentsError& e) {
    rethrow_in_context(e, target.z0);
  } catch (const UndefinedStatisticError& e) {
    rethrow_in_context(e, target.z0);
  } catch (const UnsupportedSizeError& e) {
    rethrow_in_context(e, target.z0);
  }
}

TestOutcome run_multi_target(std::span<const ObservationPair> ysample,
                             std::span<const ObservationPair> xsample,
                             const TestConfig& config) {
  validate_alpha(config.alpha);
  if (config.targets.empty()) throw InvalidParameterError("at least one target is required");
  std::vector<TargetPoint> targets = config.targets;
  std::sort(targets.begin(), targets.end(),
            [](const TargetPoint& a, const TargetPoint& b) { return a.z0 < b.z0; });
  for (std::size_t i = 1; i < targets.size(); ++i) {
    if (targets[i].z0 == targets[i - 1].z0) {
      throw InvalidParameterError("targets must be distinct");
    }
  }
  const double level = per_target_level(config.alpha, targets.size());

  TestOutcome out;
  for (const auto& t : targets) {
    out.per_target.push_back(run_single_target(ysample, xsample, t, level, config));
    out.overall_reject = out.overall_reject || out.per_target.back().reject;
  }

  for (std::size_t i = 0; i < out.per_target.size(); ++i) {
    for (std::size_t j = i + 1; j < out.per_target.size(); ++j) {
      const auto& a = out.per_target[i];
      const auto& b = out.per_target[j];
      const auto ys = shared(a.y_indices, b.y_indices);
      const auto xs = shared(a.x_indices, b.x_indices);
      if (ys.empty() && xs.empty()) continue;
      std::ostringstream os;
      os.precision(17);
      os << "effective samples at targets " << a.target.z0 << " and " << b.target.z0
         << " share observations";
      if (!ys.empty()) os << "; Y indices " << join_indices(ys);
      if (!xs.empty()) os << "; X indices " << join_indices(xs);
      out.warnings.push_back(os.str());
    }
  }
  for (const auto& r : out.per_target) {
    for (const auto& w : r.warnings) {
      if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end()) {
        out.warnings.push_back(w);
      }
    }
  }

  out.metadata["version"] = kVersion;
  out.metadata["statistic"] = std::string(to_string(config.statistic));
  out.metadata["cv_method"] = std::string(to_string(config.cv_method));
  out.metadata["targets"] = std::to_string(targets.size());
  if (config.cv_method != CvMethod::kExact) {
    out.metadata["mc_draws"] = std::to_string(config.mc_draws);
    out.metadata["mc_seed"] = std::to_string(config.mc_seed);
  }
  if (config.refined) out.metadata["refined"] = "true";
  return out;
}

TestOutcome run_rdd(std::span<const ObservationPair> sample, const TestConfig& config) {
  if (!config.rdd_cutoff) throw InvalidParameterError("RDD mode needs a cutoff");
  const double cutoff = *config.rdd_cutoff;
  if (!std::isfinite(cutoff)) throw InvalidParameterError("RDD cutoff must be finite");
  const RddSplit split = rdd_split(sample, cutoff, config.rdd_orientation);

  TestConfig cfg = config;
  if (cfg.targets.empty()) cfg.targets = {TargetPoint{cutoff}};
  if (!cfg.z_moments && cfg.q_mode == QMode::kAuto) {
    const TuningInputs pooled = estimate_moments(sample, cfg.tuning.rho_clamp);
    cfg.z_moments = ZMoments{pooled.mu_z, pooled.sigma_z};
  }
  TestOutcome out = run_multi_target(split.ysample, split.xsample, cfg);
  std::ostringstream os;
  os.precision(17);
  os << cutoff;
  out.metadata["rdd_cutoff"] = os.str();
  out.metadata["rdd_y_side"] =
      config.rdd_orientation == RddOrientation::kYAtOrBelow ? "z<=cutoff" : "z>=cutoff";
  return out;
}

}  // namespace csd
