#include "csd/simbench.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "csd/errors.hpp"
#include "csd/induced_order.hpp"
#include "csd/nulldist.hpp"
#include "csd/parallel.hpp"
#include "csd/statistics.hpp"

namespace csd {

void validate_design(const DesignSpec& spec) {
  if (spec.design < 1 || spec.design > 7) {
    throw InvalidParameterError("design must be 1-7, got " + std::to_string(spec.design));
  }
  if (spec.case_id < 'a' || spec.case_id > 'd') {
    throw InvalidParameterError(std::string("case must be a-d, got '") + spec.case_id + "'");
  }
  if (spec.n < 3) throw InvalidParameterError("design sample size must be at least 3");
}

DesignSpec parse_design(int design, const std::string& case_id, std::size_t n) {
  if (case_id.size() != 1) throw InvalidParameterError("case must be one letter a-d");
  DesignSpec spec{design, static_cast<char>(std::tolower(static_cast<unsigned char>(case_id[0]))),
                  n};
  validate_design(spec);
  return spec;
}

std::vector<double> design_targets(const DesignSpec& spec) {
  validate_design(spec);
  if (spec.case_id == 'c') {
    return spec.design == 4 ? std::vector<double>{-0.5, 0.5} : std::vector<double>{0.25, 0.75};
  }
  return {spec.design == 4 ? 0.0 : 0.5};
}

namespace {

double beta22(Rng& rng) {
  // Median of three uniforms has density 6 z (1 - z).
  double a = uniform01(rng);
  double b = uniform01(rng);
  double c = uniform01(rng);
  if (a > b) std::swap(a, b);
  if (b > c) std::swap(b, c);
  return std::max(a, b);
}

double sz_mu(double z) { return 0.61 - 0.02 * z + 0.06 * z * z + 0.17 * z * z * z; }

double censor_point() {
  static const double c =
      std::exp(boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), 0.2));
  return c;
}

struct LocationScale {
  double mu_y, mu_x, sigma_y, sigma_x;
};

LocationScale location_scale(const DesignSpec& s, double z) {
  const double z2 = z * z;
  const char c = s.case_id;
  switch (s.design) {
    case 1: {
      double my = z;
      if (c == 'b') my = 1.05 * z;
      if (c == 'd') my = 0.95 * z;
      return {my, z, z2, z2};
    }
    case 2: {
      switch (c) {
        case 'a':
          return {z, z2 + 0.25, z2, z2};
        case 'b':
          return {1.05 * z, 0.5 * z + 0.25, z2, z2};
        case 'c':
          return {z, z - (z - 0.25) * (z - 0.75), z2, z2};
        default:
          return {z, 0.6 * z + 0.25, z2, z2};
      }
    }
    case 3: {
      if (c == 'b') return {z + 0.1 * z2, z, 0.95 * z2, z2};
      if (c == 'd') return {z, z, 0.90 * z2, z2};
      return {z, z, z2, z2};
    }
    case 4: {
      const double m = sz_mu(z);
      if (c == 'b') return {m + 0.1, m, 1.0, 1.0};
      if (c == 'd') return {m, m, 0.5 + z2, 1.0};
      return {m, m, 1.0, 1.0};
    }
    case 5: {
      if (c == 'b') return {0.0, 0.0, 1.05 * z2, z2};
      if (c == 'd') return {0.0, 0.0, 0.90 * z2, z2};
      return {0.0, 0.0, z2, z2};
    }
    default:
      throw InvalidParameterError("design has no location-scale form");
  }
}

// Error term of the location-scale designs.
double draw_error(int design, Rng& rng, std::normal_distribution<double>& normal) {
  switch (design) {
    case 3:
      return uniform01(rng);
    case 5:
      return std::max(std::exp(normal(rng)), censor_point());
    default:
      return normal(rng);
  }
}

double error_cdf(int design, double e) {
  static const boost::math::normal_distribution<double> std_normal(0.0, 1.0);
  switch (design) {
    case 3:
      return std::clamp(e, 0.0, 1.0);
    case 5:
      if (e < censor_point()) return 0.0;
      return boost::math::cdf(std_normal, std::log(e));
    default:
      return boost::math::cdf(std_normal, e);
  }
}

double design6_shift(char c) {
  switch (c) {
    case 'b':
      return 1.0;
    case 'd':
      return -0.5;
    default:
      return 0.0;
  }
}

int design7_shift(char c) {
  switch (c) {
    case 'b':
      return 1;
    case 'd':
      return -1;
    default:
      return 0;
  }
}

double draw_category(const double theta[3], double z, Rng& rng) {
  double p[3];
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    p[k] = std::exp(theta[k] * (1.5 - z));
    total += p[k];
  }
  const double u = uniform01(rng) * total;
  if (u < p[0]) return 1.0;
  if (u < p[0] + p[1]) return 2.0;
  return 3.0;
}

// Binomial(t, 1/2) as the popcount of t random bits.
double half_binomial(long trials, Rng& rng) {
  if (trials <= 0) return 0.0;
  const std::uint64_t bits = rng();
  const std::uint64_t mask = trials >= 64 ? ~0ULL : ((1ULL << trials) - 1ULL);
  return static_cast<double>(std::popcount(bits & mask));
}

long design7_trials(double z) { return std::lround(25.0 * z); }

}  // namespace

std::size_t design_support_size(const DesignSpec& spec, double z0) {
  validate_design(spec);
  if (spec.design == 6) return 3;
  if (spec.design == 7) {
    const long t = design7_trials(z0);
    const long ty = std::max(0L, t + design7_shift(spec.case_id));
    return static_cast<std::size_t>(std::min(t, ty) + 1);
  }
  throw InvalidParameterError("support size is defined for the discrete designs 6 and 7");
}

double design_y_cdf(const DesignSpec& spec, double z, double t) {
  validate_design(spec);
  if (spec.design > 5) throw InvalidParameterError("conditional CDF implemented for designs 1-5");
  const LocationScale ls = location_scale(spec, z);
  return error_cdf(spec.design, (t - ls.mu_y) / ls.sigma_y);
}

DesignDraw draw_design(const DesignSpec& spec, Rng& rng) {
  validate_design(spec);
  DesignDraw d;
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = spec.n;

  if (spec.design == 4) {
    d.rdd = true;
    d.cutoff = 0.0;
    d.pooled.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = 2.0 * beta22(rng) - 1.0;
      const LocationScale ls = location_scale(spec, z);
      const double e = normal(rng);
      const double w = z >= 0.0 ? ls.mu_y + ls.sigma_y * e : ls.mu_x + ls.sigma_x * e;
      d.pooled.push_back({w, z, i});
    }
    return d;
  }

  d.ysample.reserve(n);
  d.xsample.reserve(n);
  if (spec.design == 6) {
    const double tx[3] = {-0.5, -1.5, -2.0};
    const double m = design6_shift(spec.case_id);
    const double ty[3] = {tx[0] - m, tx[1] + m, tx[2]};
    for (std::size_t i = 0; i < n; ++i) {
      const double z = beta22(rng);
      d.ysample.push_back({draw_category(ty, z, rng), z, i});
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double z = beta22(rng);
      d.xsample.push_back({draw_category(tx, z, rng), z, i});
    }
    return d;
  }
  if (spec.design == 7) {
    const int m = design7_shift(spec.case_id);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = beta22(rng);
      d.ysample.push_back({half_binomial(design7_trials(z) + m, rng), z, i});
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double z = beta22(rng);
      d.xsample.push_back({half_binomial(design7_trials(z), rng), z, i});
    }
    return d;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double z = beta22(rng);
    const LocationScale ls = location_scale(spec, z);
    d.ysample.push_back({ls.mu_y + ls.sigma_y * draw_error(spec.design, rng, normal), z, i});
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double z = beta22(rng);
    const LocationScale ls = location_scale(spec, z);
    d.xsample.push_back({ls.mu_x + ls.sigma_x * draw_error(spec.design, rng, normal), z, i});
  }
  return d;
}

namespace {

struct RepOutcome {
  bool ok = false;
  bool reject = false;
  bool default_reject = false;
  std::vector<double> q_y;
  std::vector<double> q_x;
  std::vector<char> target_reject;
  std::string error;
};

}  // namespace

SimResult run_monte_carlo(const DesignSpec& spec, double alpha, std::uint64_t reps,
                          std::uint64_t seed, const SimOptions& options) {
  validate_design(spec);
  validate_alpha(alpha);
  if (reps == 0) throw InvalidParameterError("reps must be at least 1");
  const std::vector<double> targets = design_targets(spec);

  TestConfig cfg;
  cfg.alpha = alpha;
  for (double t : targets) cfg.targets.push_back({t});
  cfg.statistic = options.statistic;
  if (options.manual_q) {
    cfg.q_mode = QMode::kManual;
    cfg.manual_q = {*options.manual_q};
  }
  cfg.workers = 1;
  if (options.refined) {
    RefinedSpec rs = options.refined_spec;
    if (options.refined_r) {
      rs.r = *options.refined_r;
    } else {
      rs.r = 1;
      for (double t : targets) rs.r = std::max(rs.r, design_support_size(spec, t));
    }
    cfg.refined = rs;
  }
  if (spec.design == 4) {
    cfg.rdd_cutoff = 0.0;
    cfg.rdd_orientation = RddOrientation::kYAbove;
  }

  std::vector<RepOutcome> out(reps);
  parallel_for(static_cast<std::size_t>(reps), options.workers, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    RepOutcome& r = out[i];
    try {
      const DesignDraw d = draw_design(spec, rng);
      const TestOutcome o = d.rdd ? run_rdd(d.pooled, cfg)
                                  : run_multi_target(d.ysample, d.xsample, cfg);
      r.reject = o.overall_reject;
      for (const auto& t : o.per_target) {
        r.q_y.push_back(static_cast<double>(t.q_y));
        r.q_x.push_back(static_cast<double>(t.q_x));
        r.target_reject.push_back(t.reject ? 1 : 0);
        if (t.statistic_value > t.default_critical_value) r.default_reject = true;
      }
      r.ok = true;
    } catch (const CsdError& e) {
      r.error = e.what();
    }
  });

  SimResult res;
  res.spec = spec;
  res.alpha = alpha;
  res.reps = reps;
  res.seed = seed;
  res.targets = targets;
  const std::size_t L = targets.size();
  res.per_target_rejection.assign(L, 0.0);
  res.per_target_mean_q_y.assign(L, 0.0);
  res.per_target_mean_q_x.assign(L, 0.0);
  std::size_t ok = 0;
  std::size_t rejects = 0;
  std::size_t default_rejects = 0;
  for (const auto& r : out) {
    if (!r.ok) {
      ++res.failures;
      if (res.failure_messages.size() < 5) res.failure_messages.push_back(r.error);
      continue;
    }
    ++ok;
    rejects += r.reject ? 1 : 0;
    default_rejects += r.default_reject ? 1 : 0;
    if (r.default_reject && !r.reject) ++res.dominance_violations;
    for (std::size_t k = 0; k < L; ++k) {
      res.per_target_rejection[k] += r.target_reject[k];
      res.per_target_mean_q_y[k] += r.q_y[k];
      res.per_target_mean_q_x[k] += r.q_x[k];
    }
  }
  if (static_cast<double>(res.failures) > options.max_failure_rate * static_cast<double>(reps)) {
    throw CsdError(std::to_string(res.failures) + " of " + std::to_string(reps) +
                   " replications failed; first error: " +
                   (res.failure_messages.empty() ? "" : res.failure_messages.front()));
  }
  const double m = static_cast<double>(ok);
  res.rejection_rate = static_cast<double>(rejects) / m;
  res.se = std::sqrt(res.rejection_rate * (1.0 - res.rejection_rate) / m);
  for (std::size_t k = 0; k < L; ++k) {
    res.per_target_rejection[k] /= m;
    res.per_target_mean_q_y[k] /= m;
    res.per_target_mean_q_x[k] /= m;
    res.mean_q_y += res.per_target_mean_q_y[k] / static_cast<double>(L);
    res.mean_q_x += res.per_target_mean_q_x[k] / static_cast<double>(L);
  }
  if (options.refined && options.statistic == StatisticKind::kKs) {
    res.default_rejection_rate = static_cast<double>(default_rejects) / m;
  }
  return res;
}

namespace {

void validate_discrete(const DiscreteDistribution& d) {
  if (d.values.empty() || d.values.size() != d.probs.size()) {
    throw InvalidParameterError("discrete distribution needs matching values and probabilities");
  }
  double total = 0.0;
  for (double p : d.probs) {
    if (!(p >= 0.0)) throw InvalidParameterError("probabilities must be non-negative");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw InvalidParameterError("probabilities must sum to 1");
}

double draw_discrete(const DiscreteDistribution& d, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < d.values.size(); ++k) {
    acc += d.probs[k];
    if (u < acc) return d.values[k];
  }
  return d.values.back();
}

}  // namespace

LimitExperimentResult limit_experiment_check(const DiscreteDistribution& dist_y,
                                             const DiscreteDistribution& dist_x,
                                             std::size_t q_y, std::size_t q_x,
                                             StatisticKind kind, double alpha,
                                             std::uint64_t reps, std::uint64_t seed) {
  validate_discrete(dist_y);
  validate_discrete(dist_x);
  validate_alpha(alpha);
  if (reps == 0) throw InvalidParameterError("reps must be at least 1");
  LimitExperimentResult res;
  res.critical_value = kind == StatisticKind::kKs
                           ? exact_critical_value(q_y, q_x, alpha)
                           : critical_value(enumerated_null(kind, q_y, q_x), alpha);
  std::size_t rejects = 0;
  std::vector<double> y(q_y);
  std::vector<double> x(q_x);
  for (std::uint64_t i = 0; i < reps; ++i) {
    Rng rng = make_stream(seed, i);
    for (auto& v : y) v = draw_discrete(dist_y, rng);
    for (auto& v : x) v = draw_discrete(dist_x, rng);
    try {
      if (compute_statistic(kind, y, x) > res.critical_value) ++rejects;
    } catch (const UndefinedStatisticError&) {
      ++res.undefined;
    }
  }
  res.rejection_rate = static_cast<double>(rejects) / static_cast<double>(reps);
  res.se = std::sqrt(res.rejection_rate * (1.0 - res.rejection_rate) / static_cast<double>(reps));
  return res;
}

double induced_convergence_distance(const DesignSpec& spec, double z0, std::uint64_t reps,
                                    std::uint64_t seed, std::size_t workers) {
  validate_design(spec);
  if (spec.design > 5 || spec.design == 4) {
    throw InvalidParameterError("convergence check needs a two-sample continuous design");
  }
  if (reps == 0) throw InvalidParameterError("reps must be at least 1");
  std::vector<double> first(reps);
  parallel_for(static_cast<std::size_t>(reps), workers, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    const DesignDraw d = draw_design(spec, rng);
    first[i] = g_order_select(d.ysample, z0, 1).front();
  });
  std::sort(first.begin(), first.end());
  const double m = static_cast<double>(reps);
  double dist = 0.0;
  for (std::size_t k = 0; k < first.size(); ++k) {
    const double f = design_y_cdf(spec, z0, first[k]);
    dist = std::max({dist, std::fabs(static_cast<double>(k + 1) / m - f),
                     std::fabs(f - static_cast<double>(k) / m)});
  }
  return dist;
}

}  // namespace csd
