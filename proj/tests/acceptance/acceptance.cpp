// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "csd/errors.hpp"
#include "csd/nulldist.hpp"
#include "csd/permutation.hpp"
#include "csd/refined.hpp"
#include "csd/runner.hpp"
#include "csd/simbench.hpp"
#include "csd/statistics.hpp"
#include "oracles.hpp"

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Verdict {
  bool pass = true;
  std::string detail;
};

void note(Verdict& v, bool ok, const std::string& what) {
  if (!v.detail.empty()) v.detail += "; ";
  v.detail += what + (ok ? "" : " [miss]");
  v.pass = v.pass && ok;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Verdict golden_values() {
  Verdict v;
  const auto t0 = Clock::now();
  const double c = csd::exact_critical_value(70, 70, 0.05);
  const double scaled = std::sqrt(70.0 * 70.0 / 140.0) * c;
  const double lim = csd::limiting_critical_value(0.05);
  const double secs = seconds_since(t0);
  note(v, std::fabs(scaled - 1.1832) <= 0.0005, fmt("scaled c(70,70)=%.6f (1.1832+-0.0005)", scaled));
  note(v, std::fabs(lim - 1.2239) <= 0.0001, fmt("limiting=%.6f (1.2239+-0.0001)", lim));
  note(v, secs < 5.0, fmt("%.3fs (<5s)", secs));
  return v;
}

Verdict exact_vs_mc() {
  Verdict v;
  const auto t0 = Clock::now();
  double worst = 0.0;
  int wy = 0, wx = 0;
  for (int qy = 1; qy <= 8; ++qy) {
    for (int qx = 1; qx <= 8; ++qx) {
      const auto exact = csd::exact_null_cdf(qy, qx);
      const auto mc = csd::mc_null_cdf(qy, qx, 1'000'000, kSeed + qy * 10 + qx);
      // Both are step functions on the same lattice; compare at every atom of either.
      std::vector<double> pts = exact.support;
      pts.insert(pts.end(), mc.support.begin(), mc.support.end());
      for (double x : pts) {
        const double d = std::fabs(exact.cdf_at(x) - mc.cdf_at(x));
        if (d > worst) {
          worst = d;
          wy = qy;
          wx = qx;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  note(v, worst <= 0.005,
       fmt("max sup-distance=%.5f at (%g,%g) (<=0.005)", worst, wy, wx));
  note(v, secs < 120.0, fmt("%.1fs (<120s)", secs));
  return v;
}

Verdict enumeration_oracles() {
  Verdict v;
  const auto d22 = csd::exact_null_cdf(2, 2);
  const bool ok22 = d22.cdf_at(0.0) == 1.0 / 3.0 && d22.cdf_at(0.5) == 5.0 / 6.0 &&
                    d22.cdf_at(1.0) == 1.0;
  note(v, ok22, fmt("(2,2): %.17g %.17g %.17g", d22.cdf_at(0.0), d22.cdf_at(0.5), d22.cdf_at(1.0)));
  const auto d11 = csd::exact_null_cdf(1, 1);
  const bool ok11 = d11.cdf_at(0.0) == 0.5 && d11.cdf_at(1.0) == 1.0;
  note(v, ok11, fmt("(1,1): %.17g %.17g", d11.cdf_at(0.0), d11.cdf_at(1.0)));
  // The same values from brute-force interleavings.
  const bool brute = oracle::sup_cdf_numerator(2, 2, 0) == 1.0 / 3.0 &&
                     oracle::sup_cdf_numerator(2, 2, 2) == 5.0 / 6.0 &&
                     oracle::sup_cdf_numerator(2, 2, 4) == 1.0 &&
                     oracle::sup_cdf_numerator(1, 1, 0) == 0.5 &&
                     oracle::sup_cdf_numerator(1, 1, 1) == 1.0;
  note(v, brute, "interleaving oracle agrees");
  return v;
}

Verdict permutation_equivalence() {
  Verdict v;
  std::mt19937_64 rng(kSeed + 4);
  std::normal_distribution<double> nd;
  int agree = 0;
  const int cases = 200;
  for (int i = 0; i < cases; ++i) {
    const std::size_t q = 2 + rng() % 11;  // 2..12
    const std::size_t qy = 1 + rng() % (q - 1);
    csd::EffectiveSample s;
    for (std::size_t k = 0; k < qy; ++k) s.y_values.push_back(nd(rng));
    for (std::size_t k = qy; k < q; ++k) s.x_values.push_back(nd(rng));
    const double a = i % 2 == 0 ? 0.05 : 0.1;
    if (csd::permutation_critical_value(s, a) == csd::exact_critical_value(qy, q - qy, a)) ++agree;
  }
  note(v, agree == cases, fmt("%g of %g tie-free samples agree", agree, cases));
  csd::EffectiveSample ties;
  ties.y_values = {1.0};
  ties.x_values = {1.0};
  const double cp = csd::permutation_critical_value(ties, 0.1);
  const double cd = csd::exact_critical_value(1, 1, 0.1);
  note(v, cp == 0.0 && cp != cd, fmt("all-ties permutation cv=%g vs data-independent %g", cp, cd));
  return v;
}

struct SizeRuns {
  csd::SimResult a, b, c;
};

SizeRuns design1_size_runs() {
  SizeRuns s;
  s.a = csd::run_monte_carlo({1, 'a', 1000}, 0.1, 2000, kSeed + 51);
  s.b = csd::run_monte_carlo({1, 'b', 1000}, 0.1, 2000, kSeed + 52);
  s.c = csd::run_monte_carlo({1, 'c', 1000}, 0.1, 2000, kSeed + 53);
  return s;
}

Verdict size_at_desk_scale(const SizeRuns& s) {
  Verdict v;
  const double ra = s.a.rejection_rate, rb = s.b.rejection_rate, rc = s.c.rejection_rate;
  note(v, ra >= 0.08 && ra <= 0.12, fmt("1a rate=%.4f ([0.08,0.12])", ra));
  note(v, rb <= ra + 0.01, fmt("1b rate=%.4f (<= 1a + 0.01 = %.4f)", rb, ra + 0.01));
  note(v, rc >= 0.07 && rc <= 0.12, fmt("1c rate=%.4f ([0.07,0.12])", rc));
  return v;
}

Verdict tuning_reproduction(const SizeRuns& s) {
  Verdict v;
  const double my = s.a.mean_q_y, mx = s.a.mean_q_x;
  note(v, s.a.reps >= 1000, fmt("reps=%g", static_cast<double>(s.a.reps)));
  note(v, my >= 77.5 && my <= 81.5, fmt("mean q_y=%.3f ([77.5,81.5])", my));
  note(v, mx >= 77.5 && mx <= 81.5, fmt("mean q_x=%.3f ([77.5,81.5])", mx));
  return v;
}

Verdict limit_experiment() {
  Verdict v;
  const csd::DiscreteDistribution bern{{0.0, 1.0}, {0.5, 0.5}};
  const std::uint64_t reps = 200'000;
  for (auto [kind, name] : {std::pair{csd::StatisticKind::kCvm, "CvM"},
                            std::pair{csd::StatisticKind::kAd, "AD"}}) {
    const auto r = csd::limit_experiment_check(bern, bern, 2, 1, kind, 0.05, reps, kSeed + 7);
    note(v, std::fabs(r.rejection_rate - 0.125) <= 0.01,
         std::string(name) + fmt(" rate=%.4f (0.125+-0.01)", r.rejection_rate));
  }
  const auto ks =
      csd::limit_experiment_check(bern, bern, 2, 1, csd::StatisticKind::kKs, 0.05, reps, kSeed + 8);
  const double bound = 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / static_cast<double>(reps));
  note(v, ks.rejection_rate <= bound, fmt("KS rate=%.4f (<=%.4f)", ks.rejection_rate, bound));
  return v;
}

Verdict refined_critical_value() {
  Verdict v;
  const auto rr = csd::refined_critical_value(2, 2, 0.1, {1});
  const double c = csd::exact_critical_value(2, 2, 0.1);
  note(v, rr.critical_value == 0.5 && c == 1.0,
       fmt("(2,2) r=1 refined=%g default=%g", rr.critical_value, c));
  // Independent check: the binomial oracle at u = 1/2 reaches 0.9 at level 0.5 but not at 0.
  const bool oracle_ok = oracle::single_point_cdf(2, 2, 0.5, 2) >= 0.9 &&
                         oracle::single_point_cdf(2, 2, 0.5, 0) < 0.9;
  note(v, oracle_ok, "binomial oracle agrees");
  for (int design : {6, 7}) {
    csd::SimOptions opts;
    opts.refined = true;
    const auto r = csd::run_monte_carlo({design, 'a', 1000}, 0.1, 1000, kSeed + 80 + design, opts);
    const double def = r.default_rejection_rate.value_or(-1.0);
    note(v, r.rejection_rate <= 0.12,
         fmt("design %ga refined rate=%.4f (<=0.12)", design, r.rejection_rate));
    note(v, def <= r.rejection_rate,
         fmt("design %ga default rate=%.4f (<= refined)", design, def));
  }
  return v;
}

Verdict power_properties() {
  Verdict v;
  const std::uint64_t reps = 1000;
  for (int design = 1; design <= 7; ++design) {
    const auto a = csd::run_monte_carlo({design, 'a', 2000}, 0.1, reps, kSeed + 900 + design);
    double prev = -1.0, prev_se = 0.0;
    bool monotone = true;
    std::string rates;
    double at2000 = 0.0;
    for (std::size_t n : {500u, 1000u, 2000u}) {
      const auto d = csd::run_monte_carlo({design, 'd', n}, 0.1, reps, kSeed + 9000 + design * 10 + n / 500);
      if (prev >= 0.0) {
        const double tol = 2.0 * std::sqrt(prev_se * prev_se + d.se * d.se);
        monotone = monotone && d.rejection_rate >= prev - tol;
      }
      prev = d.rejection_rate;
      prev_se = d.se;
      rates += (rates.empty() ? "" : "/") + fmt("%.3f", d.rejection_rate);
      at2000 = d.rejection_rate;
    }
    note(v, at2000 >= a.rejection_rate + 0.1,
         fmt("design %g: d(2000)=%.3f vs a(2000)=%.3f", design, at2000, a.rejection_rate));
    note(v, monotone, "d over n=500/1000/2000 " + rates);
  }
  return v;
}

Verdict convergence() {
  Verdict v;
  std::vector<double> dist;
  for (std::size_t n : {250u, 1000u, 4000u}) {
    dist.push_back(csd::induced_convergence_distance({1, 'a', n}, 0.5, 2000, kSeed + 10 + n));
  }
  const bool dec = dist[0] > dist[1] && dist[1] > dist[2];
  note(v, dec, fmt("KS distance n=250: %.4f, n=1000: %.4f, n=4000: %.4f (strictly decreasing)",
                   dist[0], dist[1], dist[2]));
  return v;
}

Verdict rank_invariance() {
  Verdict v;
  std::mt19937_64 rng(kSeed + 11);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud;
  const std::vector<std::function<double(double)>> maps = {
      [](double x) { return 2.5 * x + 1.0; },
      [](double x) { return std::exp(x); },
      [](double x) { return x * x * x; },
      [](double x) { return std::sinh(x); },
      [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double x) { return std::atan(x) - 7.0; },
  };
  int ks_ok = 0, rank_ok = 0;
  const int samples = 1000;
  for (int i = 0; i < samples; ++i) {
    const std::size_t n = 40;
    csd::Sample y, x;
    for (std::size_t k = 0; k < n; ++k) {
      y.push_back({nd(rng) - 0.3 * ud(rng), ud(rng), k});
      x.push_back({nd(rng), ud(rng), k});
    }
    if (i % 4 == 0) x[3].w = y[5].w;  // some ties
    const auto& f = maps[rng() % maps.size()];
    csd::Sample ty = y, tx = x;
    for (auto& o : ty) o.w = f(o.w);
    for (auto& o : tx) o.w = f(o.w);

    csd::TestConfig c;
    c.alpha = 0.1;
    c.targets = {{0.5}};
    c.q_mode = csd::QMode::kManual;
    c.manual_q = {{5 + rng() % 20, 5 + rng() % 20}};
    const auto b0 = csd::run_single_target(y, x, {0.5}, 0.1, c);
    const auto b1 = csd::run_single_target(ty, tx, {0.5}, 0.1, c);
    if (b0.statistic_value == b1.statistic_value && b0.reject == b1.reject &&
        b0.critical_value == b1.critical_value) {
      ++ks_ok;
    }
    bool ok = true;
    c.manual_q = {{1 + rng() % 7, 1 + rng() % 7}};
    for (auto kind : {csd::StatisticKind::kCvm, csd::StatisticKind::kAd}) {
      c.statistic = kind;
      try {
        const auto r0 = csd::run_single_target(y, x, {0.5}, 0.1, c);
        const auto r1 = csd::run_single_target(ty, tx, {0.5}, 0.1, c);
        ok = ok && std::fabs(r0.statistic_value - r1.statistic_value) <= 1e-12;
      } catch (const csd::UndefinedStatisticError&) {
        // Must be undefined for the transformed sample too.
        try {
          csd::run_single_target(ty, tx, {0.5}, 0.1, c);
          ok = false;
        } catch (const csd::UndefinedStatisticError&) {
        }
      }
    }
    if (ok) ++rank_ok;
  }
  note(v, ks_ok == samples, fmt("KS identical in %g of %g", ks_ok, samples));
  note(v, rank_ok == samples, fmt("CvM/AD within 1e-12 in %g of %g", rank_ok, samples));
  return v;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Verdict()>& f) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = f();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", id, name,
                v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    if (!v.pass) ++failures;
  };

  report(1, "critical-value golden values", golden_values);
  report(2, "exact vs Monte Carlo null", exact_vs_mc);
  report(3, "small-case enumeration", enumeration_oracles);
  report(4, "permutation equivalence", permutation_equivalence);
  SizeRuns size_runs;
  bool size_ok = true;
  std::string size_error;
  const auto t_size = Clock::now();
  try {
    size_runs = design1_size_runs();
  } catch (const std::exception& e) {
    size_ok = false;
    size_error = e.what();
  }
  std::printf("(design 1 size runs: %.1fs)\n", seconds_since(t_size));
  report(5, "size at desk scale", [&] {
    if (!size_ok) throw std::runtime_error(size_error);
    return size_at_desk_scale(size_runs);
  });
  report(6, "tuning reproduction", [&] {
    if (!size_ok) throw std::runtime_error(size_error);
    return tuning_reproduction(size_runs);
  });
  report(7, "limit-experiment invalidity", limit_experiment);
  report(8, "refined critical value", refined_critical_value);
  report(9, "power properties", power_properties);
  report(10, "induced order convergence", convergence);
  report(11, "rank invariance", rank_invariance);

  std::printf("%s: %d of 11 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
