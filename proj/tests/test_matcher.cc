#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <set>

#include "hetserve/errors.h"
#include "hetserve/matcher.h"
#include "test_util.h"

using namespace hetserve;

namespace {

using Rows = std::vector<std::vector<double>>;

// Minimum over every injection of the smaller side into the larger one.
double exhaustive_min(const Rows& c) {
  const std::size_t m = c.size(), n = c[0].size();
  const bool tr = m > n;
  const std::size_t k = std::min(m, n);
  std::vector<std::size_t> cols(std::max(m, n));
  std::iota(cols.begin(), cols.end(), 0);
  double best = INFINITY;
  do {
    double s = 0;
    for (std::size_t r = 0; r < k; ++r) s += tr ? c[cols[r]][r] : c[r][cols[r]];
    best = std::min(best, s);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

Rows random_rows(std::mt19937_64& rng, std::size_t m, std::size_t n, int kind) {
  Rows c(m, std::vector<double>(n));
  for (auto& row : c)
    for (auto& x : row) {
      switch (kind) {
        case 0: x = static_cast<double>(rng() % 1000); break;
        case 1: x = static_cast<double>(50 * (rng() % 3) + rng() % 4); break;
        default: x = (rng() % 4 == 0) ? 1000.0 * (1 + rng() % 3) : static_cast<double>(rng() % 100);
      }
    }
  return c;
}

void check_plan_shape(const AssignmentPlan& plan, std::size_t m, std::size_t n) {
  ASSERT_EQ(plan.pairs.size(), std::min(m, n));
  std::set<std::size_t> rows, cols;
  for (auto [i, j] : plan.pairs) {
    EXPECT_LT(i, m);
    EXPECT_LT(j, n);
    EXPECT_TRUE(rows.insert(i).second);
    EXPECT_TRUE(cols.insert(j).second);
  }
  EXPECT_EQ(plan.unassigned_queries.size(), m - plan.pairs.size());
  EXPECT_EQ(plan.unassigned_instances.size(), n - plan.pairs.size());
}

}  // namespace

TEST(Solve, DiagonalOptimum) {
  auto plan = solve(CostMatrix::from_rows({{0, 9}, {9, 0}}));
  EXPECT_EQ(plan.pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}}));
  EXPECT_EQ(plan.total_cost, 0.0);
}

TEST(Solve, SingleAndRectangular) {
  auto one = brute_force_solve(CostMatrix::from_rows({{4.5}}));
  EXPECT_EQ(one.pairs.size(), 1u);
  EXPECT_EQ(one.total_cost, 4.5);
  auto wide = solve(CostMatrix::from_rows({{5, 1, 9, 9, 9}, {1, 5, 9, 9, 9}}));
  check_plan_shape(wide, 2, 5);
  EXPECT_EQ(wide.total_cost, 2.0);
  EXPECT_EQ(wide.unassigned_instances, (std::vector<std::size_t>{2, 3, 4}));
  auto tall = solve(CostMatrix::from_rows({{3, 8}, {1, 2}, {6, 1}}));
  check_plan_shape(tall, 3, 2);
  EXPECT_EQ(tall.total_cost, 2.0);
  EXPECT_EQ(tall.unassigned_queries, (std::vector<std::size_t>{0}));
}

TEST(Solve, EmptyMatrix) {
  auto plan = solve(CostMatrix(0, 3));
  EXPECT_TRUE(plan.pairs.empty());
  EXPECT_EQ(plan.unassigned_instances.size(), 3u);
}

TEST(Solve, OptimalAgainstExhaustiveOracle) {
  std::mt19937_64 rng(99);
  int cases = 0;
  for (int kind = 0; kind < 3; ++kind)
    for (int t = 0; t < 400; ++t) {
      std::size_t m = 1 + rng() % 8, n = 1 + rng() % 8;
      auto rows = random_rows(rng, m, n, kind);
      auto matrix = CostMatrix::from_rows(rows);
      auto plan = solve(matrix);
      check_plan_shape(plan, m, n);
      double oracle = exhaustive_min(rows);
      ASSERT_EQ(plan.total_cost, oracle) << m << "x" << n;
      double recomputed = 0;
      for (auto [i, j] : plan.pairs) recomputed += rows[i][j];
      EXPECT_EQ(recomputed, plan.total_cost);
      ++cases;
    }
  EXPECT_GE(cases, 1000);
}

TEST(Solve, ContinuousCostsWithinTolerance) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 50);
  for (int t = 0; t < 300; ++t) {
    std::size_t m = 1 + rng() % 7, n = 1 + rng() % 7;
    Rows rows(m, std::vector<double>(n));
    for (auto& r : rows)
      for (auto& x : r) x = u(rng);
    EXPECT_NEAR(solve(CostMatrix::from_rows(rows)).total_cost, exhaustive_min(rows), 1e-9);
  }
}

TEST(BruteForce, MatchesIndependentOracleAndRejectsLarge) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    std::size_t m = 1 + rng() % 6, n = 1 + rng() % 6;
    auto rows = random_rows(rng, m, n, t % 3);
    auto plan = brute_force_solve(CostMatrix::from_rows(rows));
    check_plan_shape(plan, m, n);
    EXPECT_EQ(plan.total_cost, exhaustive_min(rows));
  }
  EXPECT_THROW(brute_force_solve(CostMatrix(9, 9)), ParameterError);
}

TEST(Solve, RowPermutationEquivariance) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 300; ++t) {
    std::size_t m = 1 + rng() % 7, n = 1 + rng() % 7;
    std::uniform_real_distribution<double> u(0, 100);
    Rows rows(m, std::vector<double>(n));
    for (auto& r : rows)
      for (auto& x : r) x = u(rng);  // continuous entries make the optimum unique
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Rows permuted(m);
    for (std::size_t i = 0; i < m; ++i) permuted[i] = rows[perm[i]];
    auto a = solve(CostMatrix::from_rows(rows));
    auto b = solve(CostMatrix::from_rows(permuted));
    EXPECT_NEAR(a.total_cost, b.total_cost, 1e-9);
    std::set<std::pair<std::size_t, std::size_t>> pa(a.pairs.begin(), a.pairs.end()), pb;
    for (auto [i, j] : b.pairs) pb.insert({perm[i], j});
    EXPECT_EQ(pa, pb);
  }
}

TEST(Solve, ScalingKeepsPairing) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 300; ++t) {
    std::size_t m = 1 + rng() % 7, n = 1 + rng() % 7;
    auto rows = random_rows(rng, m, n, t % 3);
    Rows scaled = rows;
    for (auto& r : scaled)
      for (auto& x : r) x *= 4.0;  // power of two: exact, ties preserved
    auto a = solve(CostMatrix::from_rows(rows)), b = solve(CostMatrix::from_rows(scaled));
    EXPECT_EQ(a.pairs, b.pairs);
    EXPECT_EQ(4.0 * a.total_cost, b.total_cost);
  }
}

TEST(Solve, Deterministic) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 100; ++t) {
    auto rows = random_rows(rng, 1 + rng() % 8, 1 + rng() % 8, 1);
    auto m = CostMatrix::from_rows(rows);
    EXPECT_EQ(solve(m).pairs, solve(m).pairs);
  }
}

TEST(Solve, TwentyByTwentyUnderOneMillisecond) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1000);
  std::vector<double> times;
  for (int rep = 0; rep < 51; ++rep) {
    Rows rows(20, std::vector<double>(20));
    for (auto& r : rows)
      for (auto& x : r) x = u(rng);
    auto matrix = CostMatrix::from_rows(rows);
    auto t0 = std::chrono::steady_clock::now();
    auto plan = solve(matrix);
    times.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    ASSERT_EQ(plan.pairs.size(), 20u);
  }
  std::nth_element(times.begin(), times.begin() + 25, times.end());
  EXPECT_LT(times[25], 1.0);
}

namespace {

struct Fixture {
  Catalog catalog = hetserve::testing::two_type_catalog();
  LatencyPredictor predictor{2, 1000};
  std::vector<double> coeff;
  Fixture() {
    for (const auto& t : catalog.types()) predictor.set_prior(t.type_id, t.latency_curve);
    coeff = heterogeneity_coefficients(catalog);
  }
};

}  // namespace

TEST(CostMatrix, IdleUnpenalizedEntry) {
  std::vector<InstanceTypeSpec> t = {hetserve::testing::type(0, "g", 1, 0.0, 0.5, true)};
  Catalog cat(t, 100);
  LatencyPredictor p(1, 100);
  p.set_prior(0, t[0].latency_curve);
  std::vector<Query> q = {{0, 10, 0.0, 0.0}};
  std::vector<InstanceState> inst = {{0, 0, 0.0, false, 0}};
  std::vector<double> c = {1.0};
  auto m = build_cost_matrix(q, inst, p, c, QoSSpec{100, 0.98, 99}, 0.0);
  EXPECT_DOUBLE_EQ(m.cost(0, 0), 5.0);
  EXPECT_FALSE(m.penalized(0, 0));
}

TEST(CostMatrix, PenaltyIsTenTimesTarget) {
  std::vector<InstanceTypeSpec> t = {hetserve::testing::type(0, "g", 1, 0.0, 4.0, true)};
  LatencyPredictor p(1, 1000);
  p.set_prior(0, t[0].latency_curve);
  std::vector<Query> q = {{0, 100, 0.0, 0.0}};  // 400 ms
  std::vector<InstanceState> inst = {{0, 0, 0.0, false, 0}};
  std::vector<double> c = {0.5};
  auto m = build_cost_matrix(q, inst, p, c, QoSSpec{350, 0.98, 99}, 0.0);
  EXPECT_TRUE(m.penalized(0, 0));
  EXPECT_DOUBLE_EQ(m.cost(0, 0), 3500.0 * 0.5);
  EXPECT_DOUBLE_EQ(m.completion_ms(0, 0), 400.0);
}

TEST(CostMatrix, GuardBandBoundary) {
  std::vector<InstanceTypeSpec> t = {hetserve::testing::type(0, "g", 1, 0.0, 1.0, true)};
  LatencyPredictor p(1, 1000);
  p.set_prior(0, t[0].latency_curve);
  std::vector<Query> q = {{0, 5, 0.0, 0.0}};  // L = 5 ms, waited 344 ms
  std::vector<InstanceState> inst = {{0, 0, 0.0, false, 0}};
  std::vector<double> c = {1.0};
  QoSSpec qos{350, 0.98, 99};
  EXPECT_TRUE(build_cost_matrix(q, inst, p, c, qos, 0.344).penalized(0, 0));
  EXPECT_FALSE(build_cost_matrix(q, inst, p, c, qos, 0.337).penalized(0, 0));
}

TEST(CostMatrix, BusyInstanceAddsRemainingWork) {
  Fixture f;
  std::vector<Query> q = {{0, 100, 1.0, 1.0}};
  std::vector<InstanceState> inst = {{0, 0, 1.030, true, 1}, {1, 1, 0.0, false, 0}};
  auto m = build_cost_matrix(q, inst, f.predictor, f.coeff, QoSSpec{100, 0.98, 99}, 1.0);
  EXPECT_NEAR(m.completion_ms(0, 0), 30.0 + 20.0, 1e-9);
  EXPECT_NEAR(m.completion_ms(0, 1), 55.0, 1e-9);
  EXPECT_NEAR(m.cost(0, 1), 55.0 * f.coeff[1], 1e-9);
}

TEST(Solve, AllPenalizedStillAssigns) {
  Fixture f;
  std::vector<Query> q = {{0, 900, 0.0, 0.0}, {1, 900, 0.0, 0.0}};
  std::vector<InstanceState> inst = {{0, 0, 0.0, false, 0}, {1, 1, 0.0, false, 0}};
  auto m = build_cost_matrix(q, inst, f.predictor, f.coeff, QoSSpec{50, 0.98, 99}, 0.0);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_TRUE(m.penalized(i, j));
  EXPECT_EQ(solve(m).pairs.size(), 2u);
}

TEST(Solve, AvoidsPenaltiesWhenAFeasibleAssignmentExists) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 500; ++t) {
    std::size_t m = 1 + rng() % 6, n = m + rng() % 3;
    CostMatrix c(m, n);
    // A hidden feasible permutation guarantees a penalty-free full assignment.
    std::vector<std::size_t> hidden(n);
    std::iota(hidden.begin(), hidden.end(), 0);
    std::shuffle(hidden.begin(), hidden.end(), rng);
    double max_feasible = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        bool feasible = hidden[i] == j || rng() % 2 == 0;
        double v = static_cast<double>(1 + rng() % 50);
        if (feasible) max_feasible = std::max(max_feasible, v);
        c.set(i, j, feasible ? v : 10.0 * 50.0 * m, v, !feasible);
      }
    auto plan = solve(c);
    for (auto [i, j] : plan.pairs) EXPECT_FALSE(c.penalized(i, j));
  }
}
