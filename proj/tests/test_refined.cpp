#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "csd/errors.hpp"
#include "csd/nulldist.hpp"
#include "csd/refined.hpp"
#include "csd/rng.hpp"
#include "csd/statistics.hpp"
#include "oracles.hpp"

namespace {

using V = std::vector<double>;

TEST(TupleCdf, BinomialExamples) {
  EXPECT_NEAR(csd::tuple_cdf(2, 2, V{0.5}, 0.0), 0.6875, 1e-15);
  EXPECT_NEAR(csd::tuple_cdf(2, 2, V{0.5}, 0.5), 0.9375, 1e-15);
  EXPECT_EQ(csd::tuple_cdf(2, 2, V{0.5}, 1.0), 1.0);
  EXPECT_EQ(csd::tuple_cdf(5, 3, V{0.1, 0.7}, 3.0), 1.0);
}

TEST(TupleCdf, RejectsBadTuples) {
  EXPECT_THROW(csd::tuple_cdf(2, 2, V{0.5, 0.4}, 0.0), csd::InvalidParameterError);
  EXPECT_THROW(csd::tuple_cdf(2, 2, V{0.5, 0.5}, 0.0), csd::InvalidParameterError);
  EXPECT_THROW(csd::tuple_cdf(2, 2, V{0.0}, 0.0), csd::InvalidParameterError);
  EXPECT_THROW(csd::tuple_cdf(2, 2, V{1.0}, 0.0), csd::InvalidParameterError);
  EXPECT_THROW(csd::tuple_cdf(2, 2, V{}, 0.0), csd::InvalidParameterError);
  EXPECT_THROW(csd::tuple_cdf(0, 2, V{0.5}, 0.0), csd::InvalidParameterError);
}

TEST(TupleCdf, SinglePointMatchesBinomialSum) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int qy = 1 + static_cast<int>(rng() % 30);
    const int qx = 1 + static_cast<int>(rng() % 30);
    const double u = 0.02 + 0.96 * std::uniform_real_distribution<double>()(rng);
    const std::int64_t k = static_cast<std::int64_t>(rng() % (qy * qx + 1));
    const double x = csd::lattice_value(k, qy, qx);
    EXPECT_NEAR(csd::tuple_cdf(qy, qx, V{u}, x), oracle::single_point_cdf(qy, qx, u, k), 1e-12);
  }
}

TEST(TupleCdf, MatchesCellEnumeration) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int qy = 1 + static_cast<int>(rng() % 4);
    const int qx = 1 + static_cast<int>(rng() % 4);
    const int r = 1 + static_cast<int>(rng() % 3);
    V u(r);
    for (auto& v : u) v = 0.05 + 0.9 * ud(rng);
    std::sort(u.begin(), u.end());
    if (std::adjacent_find(u.begin(), u.end()) != u.end()) continue;
    for (std::int64_t k = 0; k <= qy * qx; ++k) {
      EXPECT_NEAR(csd::tuple_cdf(qy, qx, u, csd::lattice_value(k, qy, qx)),
                  oracle::tuple_cdf_cells(qy, qx, u, k), 1e-13);
    }
  }
}

TEST(TupleCdf, MoreColumnsOnlyRemoveMass) {
  const V a{0.3, 0.6};
  const V b{0.3, 0.45, 0.6, 0.8};
  for (double x : {0.0, 0.1, 0.2, 0.35}) {
    EXPECT_LE(csd::tuple_cdf(20, 17, b, x), csd::tuple_cdf(20, 17, a, x) + 1e-15);
    EXPECT_GE(csd::tuple_cdf(20, 17, b, x), csd::exact_sup_cdf(20, 17, x) - 1e-15);
  }
}

TEST(TupleCdf, EquallySpacedTupleAgreesWithMonteCarlo) {
  const std::size_t qy = 12, qx = 9, r = 3;
  V u(r);
  for (std::size_t i = 0; i < r; ++i) u[i] = (i + 1.0) / (r + 1.0);
  const std::size_t draws = 200'000;
  std::vector<std::int64_t> maxima(draws);
  csd::Rng rng(77);
  for (std::size_t d = 0; d < draws; ++d) {
    std::int64_t best = 0;
    std::vector<int> ay(r, 0), bx(r, 0);
    for (std::size_t i = 0; i < qy + qx; ++i) {
      const double v = csd::uniform01(rng);
      for (std::size_t j = 0; j < r; ++j) {
        if (v <= u[j]) (i < qy ? ay[j] : bx[j]) += 1;
      }
    }
    for (std::size_t j = 0; j < r; ++j) {
      best = std::max<std::int64_t>(best, static_cast<std::int64_t>(ay[j] * qx) -
                                              static_cast<std::int64_t>(bx[j] * qy));
    }
    maxima[d] = best;
  }
  std::sort(maxima.begin(), maxima.end());
  double worst = 0.0;
  for (std::int64_t k = 0; k <= static_cast<std::int64_t>(qy * qx); ++k) {
    const double mc = static_cast<double>(std::upper_bound(maxima.begin(), maxima.end(), k) -
                                          maxima.begin()) /
                      static_cast<double>(draws);
    worst = std::max(worst, std::fabs(mc - csd::tuple_cdf(qy, qx, u, csd::lattice_value(k, qy, qx))));
  }
  EXPECT_LE(worst, 0.005);
  // The lower bound reported by the search is that tuple's quantile.
  const auto res = csd::refined_critical_value(qy, qx, 0.1, {r, 0, 10, 200});
  std::int64_t k = 0;
  while (csd::tuple_cdf(qy, qx, u, csd::lattice_value(k, qy, qx)) < 0.9 - 1e-12) ++k;
  const auto levels = csd::support_of_delta(qy, qx);
  const double expect = *std::lower_bound(levels.begin(), levels.end(),
                                          csd::lattice_value(k, qy, qx) - 1e-15);
  EXPECT_NEAR(res.lower_bound, expect, 1e-15);
}

TEST(Refined, TwoByTwoSinglePoint) {
  const auto res = csd::refined_critical_value(2, 2, 0.1, {1});
  EXPECT_EQ(res.critical_value, 0.5);
  EXPECT_EQ(res.upper_bound, 1.0);
  EXPECT_EQ(csd::exact_critical_value(2, 2, 0.1), 1.0);
  ASSERT_EQ(res.worst_tuple.size(), 1u);
  EXPECT_NEAR(res.worst_tuple[0], 0.5, 0.02);
  EXPECT_NEAR(res.worst_probability, 0.9375, 1e-3);
}

TEST(Refined, BetweenBounds) {
  for (auto [qy, qx] : {std::pair{5, 7}, {12, 12}, {30, 21}}) {
    for (std::size_t r : {1, 2, 4}) {
      for (double a : {0.05, 0.1}) {
        const auto res = csd::refined_critical_value(qy, qx, a, {r, 0, 20, 300});
        const double c = csd::exact_critical_value(qy, qx, a);
        EXPECT_LE(res.critical_value, c);
        EXPECT_EQ(res.upper_bound, c);
        EXPECT_GE(res.critical_value, res.lower_bound);
        // Every tuple tried at the result clears the target.
        EXPECT_GE(res.worst_probability, 1.0 - a - 1e-12);
        if (!res.worst_tuple.empty()) {
          EXPECT_GE(csd::tuple_cdf(qy, qx, res.worst_tuple, res.critical_value), 1.0 - a - 1e-12);
        }
      }
    }
  }
}

TEST(Refined, NondecreasingInR) {
  double prev = 0.0;
  for (std::size_t r = 1; r <= 6; ++r) {
    const auto res = csd::refined_critical_value(15, 15, 0.1, {r, 0, 30, 500});
    EXPECT_GE(res.critical_value, prev - 1e-15) << "r=" << r;
    prev = res.critical_value;
  }
}

TEST(Refined, RichTuplesReachDefault) {
  // With (q_y + 1)(q_x + 1) points every interleaving can be resolved.
  const auto res = csd::refined_critical_value(2, 2, 0.1, {9, 0, 20, 2000});
  EXPECT_EQ(res.critical_value, csd::exact_critical_value(2, 2, 0.1));
}

TEST(Refined, GridResolution) {
  EXPECT_EQ(csd::effective_grid_resolution({1}), 101u);
  EXPECT_EQ(csd::effective_grid_resolution({2}), 63u);
  EXPECT_EQ(csd::effective_grid_resolution({3, 0, 50, 2000}), 23u);
  EXPECT_EQ(csd::effective_grid_resolution({3, 40}), 40u);
  EXPECT_THROW(csd::effective_grid_resolution({3, 2}), csd::InvalidParameterError);
  EXPECT_THROW(csd::effective_grid_resolution({0}), csd::InvalidParameterError);
}

TEST(Refined, Memoised) {
  const auto a = csd::refined_critical_value(9, 8, 0.05, {2});
  const auto b = csd::refined_critical_value(9, 8, 0.05, {2});
  EXPECT_EQ(a.critical_value, b.critical_value);
  EXPECT_EQ(a.worst_tuple, b.worst_tuple);
  EXPECT_EQ(a.evaluations, b.evaluations);
}

}  // namespace
