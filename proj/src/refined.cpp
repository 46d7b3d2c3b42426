#include "csd/refined.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "csd/errors.hpp"
#include "csd/nulldist.hpp"
#include "csd/statistics.hpp"

namespace csd {

namespace {

constexpr double kTiny = 1e-17;

// Binomial(n, p) pmf for every n in [0, N], truncated where it drops below kTiny.
struct BinomialRows {
  std::vector<std::size_t> lo;
  std::vector<std::size_t> hi;
  std::vector<std::size_t> offset;
  std::vector<double> pmf;

  void build(std::size_t big_n, double p) {
    lo.assign(big_n + 1, 0);
    hi.assign(big_n + 1, 0);
    offset.assign(big_n + 1, 0);
    pmf.clear();
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    const double odds = p / (1.0 - p);
    std::vector<double> down;
    for (std::size_t n = 0; n <= big_n; ++n) {
      offset[n] = pmf.size();
      if (n == 0 || p <= 0.0 || p >= 1.0) {
        const std::size_t k = (p >= 1.0) ? n : 0;
        lo[n] = hi[n] = k;
        pmf.push_back(1.0);
        continue;
      }
      const double nd = static_cast<double>(n);
      auto mode = static_cast<std::size_t>(std::floor((nd + 1.0) * p));
      mode = std::min(mode, n);
      const double md = static_cast<double>(mode);
      const double at_mode = std::exp(std::lgamma(nd + 1.0) - std::lgamma(md + 1.0) -
                                      std::lgamma(nd - md + 1.0) + md * lp + (nd - md) * lq);
      down.clear();
      std::size_t k = mode;
      double v = at_mode;
      while (k > 0) {
        v *= static_cast<double>(k) / (static_cast<double>(n - k + 1) * odds);
        if (v < kTiny) break;
        down.push_back(v);
        --k;
      }
      lo[n] = mode - down.size();
      for (auto it = down.rbegin(); it != down.rend(); ++it) pmf.push_back(*it);
      pmf.push_back(at_mode);
      k = mode;
      v = at_mode;
      while (k < n) {
        v *= static_cast<double>(n - k) / static_cast<double>(k + 1) * odds;
        if (v < kTiny) break;
        pmf.push_back(v);
        ++k;
      }
      hi[n] = k;
    }
  }
};

// Joint law of (#Y uniforms <= u, #X uniforms <= u) restricted to the paths on
// which Delta stayed <= k / (q_y q_x) at every tuple point visited so far.
struct DpState {
  std::vector<double> f;  // (q_y + 1) x (q_x + 1), row-major, valid inside the box
  std::size_t a0 = 0, a1 = 0, b0 = 0, b1 = 0;
  double u = 0.0;
};

class TupleDp {
 public:
  TupleDp(std::size_t q_y, std::size_t q_x, std::int64_t k)
      : qy_(q_y), qx_(q_x), k_(k), stride_(q_x + 1), tmp_((q_y + 1) * (q_x + 1), 0.0) {}

  void init(DpState& s) const {
    s.f.assign((qy_ + 1) * stride_, 0.0);
    s.f[0] = 1.0;
    s.a0 = s.a1 = s.b0 = s.b1 = 0;
    s.u = 0.0;
  }

  void advance(const DpState& in, double u, DpState& out) {
    if (out.f.size() != in.f.size()) out.f.assign(in.f.size(), 0.0);
    const double p = (u - in.u) / (1.0 - in.u);
    by_.build(qy_, p);
    bx_.build(qx_, p);

    // Y counts move first.
    std::size_t a0 = qy_ + 1, a1 = 0;
    for (std::size_t a = in.a0; a <= in.a1; ++a) {
      const std::size_t n = qy_ - a;
      a0 = std::min(a0, a + by_.lo[n]);
      a1 = std::max(a1, a + by_.hi[n]);
    }
    for (std::size_t a = a0; a <= a1; ++a) {
      std::fill(tmp_.begin() + a * stride_ + in.b0, tmp_.begin() + a * stride_ + in.b1 + 1, 0.0);
    }
    for (std::size_t a = in.a0; a <= in.a1; ++a) {
      const std::size_t n = qy_ - a;
      const double* src = in.f.data() + a * stride_;
      for (std::size_t t = by_.lo[n]; t <= by_.hi[n]; ++t) {
        const double w = by_.pmf[by_.offset[n] + t - by_.lo[n]];
        double* dst = tmp_.data() + (a + t) * stride_;
        for (std::size_t b = in.b0; b <= in.b1; ++b) dst[b] += w * src[b];
      }
    }

    // Then X counts.
    std::size_t b0 = qx_ + 1, b1 = 0;
    for (std::size_t b = in.b0; b <= in.b1; ++b) {
      const std::size_t n = qx_ - b;
      b0 = std::min(b0, b + bx_.lo[n]);
      b1 = std::max(b1, b + bx_.hi[n]);
    }
    for (std::size_t a = a0; a <= a1; ++a) {
      double* dst = out.f.data() + a * stride_;
      std::fill(dst + b0, dst + b1 + 1, 0.0);
      const double* src = tmp_.data() + a * stride_;
      for (std::size_t b = in.b0; b <= in.b1; ++b) {
        const double v = src[b];
        if (v == 0.0) continue;
        const std::size_t n = qx_ - b;
        const double* w = bx_.pmf.data() + bx_.offset[n];
        for (std::size_t t = bx_.lo[n]; t <= bx_.hi[n]; ++t) dst[b + t] += v * w[t - bx_.lo[n]];
      }
      // Delta(u) = (a q_x - b q_y) / (q_y q_x) must stay <= k / (q_y q_x).
      const std::int64_t excess =
          static_cast<std::int64_t>(a * qx_) - k_;
      if (excess > 0) {
        const auto qy = static_cast<std::int64_t>(qy_);
        const auto bmin = static_cast<std::size_t>((excess + qy - 1) / qy);
        for (std::size_t b = b0; b <= b1 && b < bmin; ++b) dst[b] = 0.0;
      }
    }
    out.u = u;
    shrink(out, a0, a1, b0, b1);
  }

  static double mass(const DpState& s, std::size_t stride) {
    double total = 0.0;
    for (std::size_t a = s.a0; a <= s.a1; ++a) {
      const double* row = s.f.data() + a * stride;
      for (std::size_t b = s.b0; b <= s.b1; ++b) total += row[b];
    }
    return total;
  }

  std::size_t stride() const { return stride_; }

 private:
  void shrink(DpState& s, std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1) const {
    std::size_t na0 = a1 + 1, na1 = a0, nb0 = b1 + 1, nb1 = b0;
    for (std::size_t a = a0; a <= a1; ++a) {
      const double* row = s.f.data() + a * stride_;
      for (std::size_t b = b0; b <= b1; ++b) {
        if (row[b] > 0.0) {
          na0 = std::min(na0, a);
          na1 = std::max(na1, a);
          nb0 = std::min(nb0, b);
          nb1 = std::max(nb1, b);
        }
      }
    }
    if (na0 > na1) {
      // No mass survives; keep a single zero cell.
      s.a0 = s.a1 = a0;
      s.b0 = s.b1 = b0;
      s.f[a0 * stride_ + b0] = 0.0;
      return;
    }
    s.a0 = na0;
    s.a1 = na1;
    s.b0 = nb0;
    s.b1 = nb1;
  }

  std::size_t qy_, qx_;
  std::int64_t k_;
  std::size_t stride_;
  std::vector<double> tmp_;
  BinomialRows by_, bx_;
};

double tuple_probability(std::size_t q_y, std::size_t q_x, std::span<const double> u,
                         std::int64_t k) {
  TupleDp dp(q_y, q_x, k);
  DpState a, b;
  dp.init(a);
  for (double v : u) {
    dp.advance(a, v, b);
    std::swap(a, b);
  }
  return std::min(1.0, TupleDp::mass(a, dp.stride()));
}

void validate_tuple(std::span<const double> u) {
  if (u.empty()) throw InvalidParameterError("tuple must contain at least one point");
  double prev = 0.0;
  for (double v : u) {
    if (!(v > prev && v < 1.0)) {
      throw InvalidParameterError("tuple must be strictly increasing inside (0, 1)");
    }
    prev = v;
  }
}

double binomial_double(std::size_t n, std::size_t k) {
  return std::exp2(log2_binomial(n, k));
}

// Running search for the worst tuple. Tuples are checked at the current
// level; one that pushes the probability below the target raises the level
// to the smallest one it accepts. Probabilities only grow with the level, so
// tuples accepted earlier stay accepted.
class WorstCaseSearch {
 public:
  WorstCaseSearch(std::size_t q_y, std::size_t q_x, std::size_t r, std::size_t m, double target,
                  const std::vector<std::int64_t>& levels, std::size_t pos, std::size_t ub_pos,
                  std::size_t& evals)
      : qy_(q_y), qx_(q_x), r_(r), m_(m), target_(target), levels_(levels), pos_(pos),
        ub_pos_(ub_pos), evals_(evals) {}

  std::size_t pos() const { return pos_; }
  double worst() const { return worst_; }
  const std::vector<double>& worst_tuple() const { return tuple_; }

  // Lexicographic pass over ordered grid tuples. Consecutive tuples share
  // their prefix DP states unless the level moved in between.
  void grid_scan() {
    std::vector<std::size_t> idx(r_);
    for (std::size_t i = 0; i < r_; ++i) idx[i] = i + 1;
    std::vector<DpState> states(r_ + 1);
    std::vector<double> u(r_);
    std::size_t valid = 0;  // states[0..valid] match idx and the level
    std::int64_t k = levels_[pos_];
    auto dp = std::make_unique<TupleDp>(qy_, qx_, k);
    dp->init(states[0]);
    while (true) {
      if (k != levels_[pos_]) {
        k = levels_[pos_];
        dp = std::make_unique<TupleDp>(qy_, qx_, k);
        valid = 0;
      }
      for (std::size_t d = valid; d < r_; ++d) {
        dp->advance(states[d], grid_point(idx[d]), states[d + 1]);
      }
      ++evals_;
      const double p = TupleDp::mass(states[r_], dp->stride());
      for (std::size_t i = 0; i < r_; ++i) u[i] = grid_point(idx[i]);
      consider(u, p);
      if (pos_ == ub_pos_) return;

      // Next combination of r points out of 1..m.
      std::size_t i = r_;
      while (i > 0 && idx[i - 1] == m_ - (r_ - i)) --i;
      if (i == 0) return;
      ++idx[i - 1];
      for (std::size_t j = i; j < r_; ++j) idx[j] = idx[j - 1] + 1;
      valid = i - 1;
    }
  }

  // Compass search minimising the probability at the current level from the
  // worst grid tuple, halving the step after a round without improvement.
  // Reports whether a coordinate moved more than one grid cell.
  bool refine(std::size_t iterations) {
    if (tuple_.empty() || iterations == 0 || pos_ == ub_pos_) return false;
    const std::vector<double> start = tuple_;
    const double cell = 1.0 / static_cast<double>(m_ + 1);
    double h = cell;
    std::vector<double> cand;
    for (std::size_t it = 0; it < iterations && h > 1e-6 && pos_ < ub_pos_; ++it) {
      bool improved = false;
      for (std::size_t i = 0; i < r_; ++i) {
        for (double dir : {-1.0, 1.0}) {
          cand = tuple_;
          cand[i] += dir * h;
          const double lo = i == 0 ? 0.0 : cand[i - 1];
          const double hi = i + 1 == r_ ? 1.0 : cand[i + 1];
          if (!(cand[i] > lo + 1e-12 && cand[i] < hi - 1e-12)) continue;
          consider(cand, eval(cand, levels_[pos_]));
          if (tuple_ == cand) improved = true;
        }
      }
      if (!improved) h /= 2.0;
    }
    bool far = false;
    for (std::size_t i = 0; i < r_; ++i) {
      if (std::fabs(tuple_[i] - start[i]) > cell + 1e-12) far = true;
    }
    return far;
  }

 private:
  bool below(double p) const { return p < target_ - kLevelTolerance; }

  double eval(std::span<const double> u, std::int64_t k) {
    ++evals_;
    return tuple_probability(qy_, qx_, u, k);
  }

  double grid_point(std::size_t g) const {
    return static_cast<double>(g) / static_cast<double>(m_ + 1);
  }

  // p is the probability of u at the current level.
  void consider(const std::vector<double>& u, double p) {
    if (below(p)) {
      // The upper bound accepts every tuple, so the search stays inside it.
      std::size_t lo = pos_ + 1;
      std::size_t hi = ub_pos_;
      double p_hi = -1.0;
      while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        const double pm = eval(u, levels_[mid]);
        if (below(pm)) {
          lo = mid + 1;
        } else {
          hi = mid;
          p_hi = pm;
        }
      }
      pos_ = lo;
      if (p_hi < 0.0) p_hi = eval(u, levels_[pos_]);
      worst_ = p_hi;
      tuple_ = u;
      return;
    }
    if (p < worst_ || tuple_.empty()) {
      worst_ = p;
      tuple_ = u;
    }
  }

  std::size_t qy_, qx_, r_, m_;
  double target_;
  const std::vector<std::int64_t>& levels_;
  std::size_t pos_, ub_pos_;
  std::size_t& evals_;
  double worst_ = 2.0;
  std::vector<double> tuple_;
};

std::vector<std::int64_t> all_levels(std::size_t q_y, std::size_t q_x) {
  std::vector<std::int64_t> ks;
  ks.reserve((q_y + 1) * (q_x + 1));
  for (std::size_t i = 0; i <= q_y; ++i) {
    for (std::size_t j = 0; j <= q_x; ++j) {
      ks.push_back(static_cast<std::int64_t>(i * q_x) - static_cast<std::int64_t>(j * q_y));
    }
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

using CacheKey = std::tuple<std::size_t, std::size_t, double, std::size_t, std::size_t,
                            std::size_t>;
std::mutex cache_mutex;
std::map<CacheKey, RefinedResult> cache;

}  // namespace

double tuple_cdf(std::size_t q_y, std::size_t q_x, std::span<const double> u, double x) {
  if (q_y == 0 || q_x == 0) throw InvalidParameterError("q_y and q_x must both be at least 1");
  validate_tuple(u);
  if (!std::isfinite(x)) throw InvalidParameterError("x must be finite");
  if (x >= 1.0) return 1.0;
  return tuple_probability(q_y, q_x, u, floor_numerator(x, q_y, q_x));
}

std::size_t effective_grid_resolution(const RefinedSpec& spec) {
  if (spec.r == 0) throw InvalidParameterError("refined support size r must be at least 1");
  if (spec.grid_resolution != 0) {
    if (spec.grid_resolution < spec.r) {
      throw InvalidParameterError("grid resolution must be at least r");
    }
    return spec.grid_resolution;
  }
  const double budget = static_cast<double>(std::max<std::size_t>(spec.max_grid_tuples, 1));
  std::size_t m = spec.r;
  while (m + 1 <= std::max<std::size_t>(101, spec.r) &&
         binomial_double(m + 1, spec.r) <= budget) {
    ++m;
  }
  return m;
}

RefinedResult refined_critical_value(std::size_t q_y, std::size_t q_x, double alpha,
                                     const RefinedSpec& spec) {
  validate_alpha(alpha);
  const std::size_t m = effective_grid_resolution(spec);
  if (binomial_double(m, spec.r) > 1e7) {
    throw UnsupportedSizeError("refined grid has too many tuples; lower grid_resolution");
  }
  const CacheKey key{q_y, q_x, alpha, spec.r, m, spec.refinement_iterations};
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }

  RefinedResult res;
  res.grid_resolution = m;
  const double target = 1.0 - alpha;
  const std::int64_t k_ub = floor_numerator(exact_critical_value(q_y, q_x, alpha), q_y, q_x);
  res.upper_bound = lattice_value(k_ub, q_y, q_x);

  const auto levels = all_levels(q_y, q_x);
  const auto ub_pos = static_cast<std::size_t>(
      std::lower_bound(levels.begin(), levels.end(), k_ub) - levels.begin());

  std::vector<double> equal(spec.r);
  for (std::size_t i = 0; i < spec.r; ++i) {
    equal[i] = static_cast<double>(i + 1) / static_cast<double>(spec.r + 1);
  }
  // Lower bound: a single tuple can only overstate the worst-case probability.
  std::size_t lo = 0;
  std::size_t hi = ub_pos;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    ++res.evaluations;
    if (tuple_probability(q_y, q_x, equal, levels[mid]) >= target - kLevelTolerance) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  res.lower_bound = lattice_value(levels[lo], q_y, q_x);

  WorstCaseSearch search(q_y, q_x, spec.r, m, target, levels, lo, ub_pos, res.evaluations);
  search.grid_scan();
  const bool far = search.refine(spec.refinement_iterations);
  res.critical_value = lattice_value(levels[search.pos()], q_y, q_x);
  if (search.pos() < ub_pos) {
    res.worst_tuple = search.worst_tuple();
    res.worst_probability = search.worst();
    if (far) {
      res.warnings.push_back(
          "refined search moved a coordinate more than one grid cell from the best grid "
          "tuple; the grid may be too coarse to bracket the minimiser");
    }
  } else {
    // The continuous-data critical value is valid for every tuple.
    res.worst_probability = exact_sup_cdf(q_y, q_x, res.upper_bound);
  }

  std::lock_guard<std::mutex> lock(cache_mutex);
  cache.emplace(key, res);
  return res;
}

}  // namespace csd
