#ifndef CSD_TESTS_ORACLES_HPP_
#define CSD_TESTS_ORACLES_HPP_

// Slow, obviously-correct reference implementations. None of them shares
// code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle {

// Exact counts of the supremum numerator k (sup Delta = k / (q_y q_x)) over
// all C(q, q_y) interleavings, visited as q-bit masks with q_y ones (1 = Y).
inline std::map<std::int64_t, std::uint64_t> sup_counts(int q_y, int q_x) {
  const int q = q_y + q_x;
  if (q > 26) throw std::invalid_argument("interleaving oracle limited to q <= 26");
  std::map<std::int64_t, std::uint64_t> counts;
  for (std::uint32_t mask = 0; mask < (1u << q); ++mask) {
    if (__builtin_popcount(mask) != q_y) continue;
    std::int64_t level = 0;
    std::int64_t best = 0;
    for (int pos = 0; pos < q; ++pos) {
      level += ((mask >> pos) & 1u) ? q_x : -q_y;
      best = std::max(best, level);
    }
    ++counts[best];
  }
  return counts;
}

// P{sup <= k / (q_y q_x)} from the interleaving counts.
inline double sup_cdf_numerator(int q_y, int q_x, std::int64_t k) {
  const auto counts = sup_counts(q_y, q_x);
  std::uint64_t total = 0;
  std::uint64_t below = 0;
  for (const auto& [v, c] : counts) {
    total += c;
    if (v <= k) below += c;
  }
  return static_cast<double>(below) / static_cast<double>(total);
}

// One-sided equal-size law by reflection: P{sup >= k / n} = C(2n, n - k) / C(2n, n).
inline double equal_size_tail(int n, int k) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  auto lc = [](double a, double b) {
    return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
  };
  return std::exp(lc(2.0 * n, n - k) - lc(2.0 * n, n));
}

// P{max_k Delta(u_k) <= k_num / (q_y q_x)} by assigning each of the q
// uniforms to one of the r + 1 cells cut by u and summing over all
// (r + 1)^q assignments.
inline double tuple_cdf_cells(int q_y, int q_x, const std::vector<double>& u,
                              std::int64_t k_num) {
  const int r = static_cast<int>(u.size());
  const int cells = r + 1;
  std::vector<double> cell_p(cells);
  double prev = 0.0;
  for (int i = 0; i < r; ++i) {
    cell_p[i] = u[i] - prev;
    prev = u[i];
  }
  cell_p[r] = 1.0 - prev;
  const int q = q_y + q_x;
  double total_pow = std::pow(static_cast<double>(cells), q);
  if (total_pow > 5e7) throw std::invalid_argument("cell oracle too large");
  const auto total = static_cast<std::uint64_t>(total_pow);
  std::vector<int> cell(q);
  double accept = 0.0;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    double prob = 1.0;
    for (int i = 0; i < q; ++i) {
      cell[i] = static_cast<int>(c % cells);
      c /= cells;
      prob *= cell_p[cell[i]];
    }
    bool ok = true;
    for (int j = 0; j < r && ok; ++j) {
      std::int64_t a = 0, b = 0;  // uniforms <= u_j
      for (int i = 0; i < q; ++i) {
        if (cell[i] <= j) (i < q_y ? a : b) += 1;
      }
      if (a * q_x - b * q_y > k_num) ok = false;
    }
    if (ok) accept += prob;
  }
  return accept;
}

inline double binomial_pmf(int n, int k, double p) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

// r = 1: P{A q_x - B q_y <= k} with A ~ Bin(q_y, u), B ~ Bin(q_x, u) independent.
inline double single_point_cdf(int q_y, int q_x, double u, std::int64_t k_num) {
  double s = 0.0;
  for (int a = 0; a <= q_y; ++a) {
    for (int b = 0; b <= q_x; ++b) {
      if (static_cast<std::int64_t>(a) * q_x - static_cast<std::int64_t>(b) * q_y <= k_num) {
        s += binomial_pmf(q_y, a, u) * binomial_pmf(q_x, b, u);
      }
    }
  }
  return s;
}

inline double ecdf(const std::vector<double>& v, double t) {
  std::size_t c = 0;
  for (double x : v) c += x <= t;
  return static_cast<double>(c) / static_cast<double>(v.size());
}

// max(0, max over pooled points of F_Y - F_X).
inline double ks(const std::vector<double>& y, const std::vector<double>& x) {
  double best = 0.0;
  for (const auto* g : {&y, &x}) {
    for (double t : *g) best = std::max(best, ecdf(y, t) - ecdf(x, t));
  }
  return best;
}

inline std::vector<double> pooled(const std::vector<double>& y, const std::vector<double>& x) {
  std::vector<double> s = y;
  s.insert(s.end(), x.begin(), x.end());
  return s;
}

// (1/q) sum over the q pooled points (duplicates included) of max(F_Y - F_X, 0)^2.
inline double cvm(const std::vector<double>& y, const std::vector<double>& x) {
  const auto s = pooled(y, x);
  double sum = 0.0;
  for (double t : s) {
    const double d = std::max(ecdf(y, t) - ecdf(x, t), 0.0);
    sum += d * d;
  }
  return sum / static_cast<double>(s.size());
}

// CvM summands over F_S (1 - F_S); terms with F_S = 1 dropped. NaN if all dropped.
inline double ad(const std::vector<double>& y, const std::vector<double>& x) {
  const auto s = pooled(y, x);
  double sum = 0.0;
  int used = 0;
  for (double t : s) {
    const double fs = ecdf(s, t);
    if (fs >= 1.0) continue;
    ++used;
    const double d = std::max(ecdf(y, t) - ecdf(x, t), 0.0);
    sum += d * d / (fs * (1.0 - fs));
  }
  if (used == 0) return std::numeric_limits<double>::quiet_NaN();
  return sum / static_cast<double>(s.size());
}

// Rule of thumb before rounding, written out term by term.
inline double rule_of_thumb(double n, double mu, double sigma, double rho, double z0) {
  const double pi = std::numbers::pi;
  const double zs = (z0 - mu) / sigma;
  const double phi = std::exp(-0.5 * zs * zs) / (sigma * std::sqrt(2.0 * pi));
  const double denom = (2.0 / sigma) / std::sqrt(2.0 * pi * std::numbers::e) +
                       std::fabs(rho) / (sigma * std::sqrt(1.0 - rho * rho)) / std::sqrt(2.0 * pi);
  return std::sqrt(n) * std::pow(4.0 * phi * phi / denom, 2.0 / 3.0);
}

}  // namespace oracle

#endif  // CSD_TESTS_ORACLES_HPP_
