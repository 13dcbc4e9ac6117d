#include <gtest/gtest.h>

#include <random>

#include "asymgame/game.hpp"
#include "test_support.hpp"

using namespace asymgame;
using asymgame::testing::make_spec;

namespace {

PayoffMatrix matrix(std::vector<std::vector<double>> rows) {
  PayoffMatrix a(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) a(r, c) = rows[r][c];
  return a;
}

PayoffMatrix random_matrix(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> size(1, 6);
  std::uniform_real_distribution<double> entry(-1, 1);
  PayoffMatrix a(size(gen), size(gen));
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) a(r, c) = entry(gen);
  return a;
}

GameSpec pennies() {
  return make_spec({{0.0}}, {1.0}, {{-1.0}, {1.0}}, {{-1.0}, {1.0}}, "u1*v1", 1.0, 4, 4);
}

}  // namespace

TEST(Game, PayoffMatrixExamples) {
  const auto p = pennies();
  const auto a = payoff_matrix(p, 0.3, p.prior);
  EXPECT_EQ(a(0, 0), 1.0);
  EXPECT_EQ(a(0, 1), -1.0);
  EXPECT_EQ(a(1, 0), -1.0);
  EXPECT_EQ(a(1, 1), 1.0);

  const auto single = make_spec({{0.4}}, {1.0}, {{0.0}, {2.0}}, {{1.0}}, "x1 + u1*v1 + t", 1.0, 1, 1);
  const auto b = payoff_matrix(single, 0.5, single.prior);
  EXPECT_DOUBLE_EQ(b(0, 0), 0.4 + 0.0 + 0.5);
  EXPECT_DOUBLE_EQ(b(1, 0), 0.4 + 2.0 + 0.5);

  const auto rev = asymgame::testing::revealing_game();
  const auto c = payoff_matrix(rev, 0.0, Belief({0.3, 0.7}));
  ASSERT_EQ(c.cols(), 1u);
  EXPECT_DOUBLE_EQ(c(0, 0), 0.7);
  EXPECT_DOUBLE_EQ(c(1, 0), 0.3);
}

TEST(Game, HamiltonianExamples) {
  const auto one = solve_matrix_game(matrix({{1}}));
  EXPECT_EQ(one.value, 1.0);
  EXPECT_TRUE(one.u_star.is_pure());
  EXPECT_TRUE(one.v_star.is_pure());

  const auto mp = hamiltonian(pennies(), 0.0, Belief({1.0}));
  EXPECT_NEAR(mp.value, 0.0, 1e-12);
  EXPECT_NEAR(mp.u_star[0], 0.5, 1e-12);
  EXPECT_NEAR(mp.v_star[0], 0.5, 1e-12);

  // Indifference oracle for [[3,1],[0,2]]: rows equalize 3u = u + 2(1-u) -> u = 1/2,
  // value 3/2; columns equalize 3v + (1-v) = 2(1-v) -> v = 1/4.
  const auto g = solve_matrix_game(matrix({{3, 1}, {0, 2}}));
  EXPECT_NEAR(g.value, 1.5, 1e-12);
  EXPECT_NEAR(g.u_star[0], 0.5, 1e-12);
  EXPECT_NEAR(g.v_star[0], 0.25, 1e-12);
}

TEST(Game, IsaacsGapExamples) {
  const auto pm = matrix({{1, -1}, {-1, 1}});
  EXPECT_EQ(isaacs_gap(pm, StrategyClass::pure), 2.0);
  EXPECT_LE(isaacs_gap(pm, StrategyClass::mixed), 1e-12);
  EXPECT_EQ(isaacs_gap(matrix({{0.3, -0.2, 0.9}}), StrategyClass::pure), 0.0);
  EXPECT_LE(isaacs_gap(pennies(), 0.0, Belief({1.0}), StrategyClass::mixed), 1e-12);
}

TEST(Game, BestResponseExamples) {
  const auto a = matrix({{3, 1}, {0, 2}});
  EXPECT_EQ(best_response_index(a, MixedAction::pure(0, 2)), 0u);
  EXPECT_EQ(best_response_index(matrix({{5}}), MixedAction::pure(0, 1)), 0u);
  // Column payoffs against (1/2, 1/2) are (1.5, 1.5): tie goes to column 0.
  const auto cols = column_payoffs(a, MixedAction({0.5, 0.5}));
  ASSERT_EQ(cols[0], 1.5);
  ASSERT_EQ(cols[1], 1.5);
  EXPECT_EQ(best_response_index(a, MixedAction({0.5, 0.5})), 0u);

  const auto br = best_response_v(pennies(), 0.0, MixedAction::pure(1, 2), Belief({1.0}));
  EXPECT_EQ(br[1], 1.0);
}

TEST(Game, MixedIsaacsOnRandomMatrices) {
  std::mt19937_64 gen(31337);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_matrix(gen);
    EXPECT_LE(isaacs_gap(a, StrategyClass::mixed), 1e-9);
  }
}

TEST(Game, ValueBetweenPureMaximinAndMinimax) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_matrix(gen);
    double minimax = 1e9, maximin = -1e9;
    for (std::size_t r = 0; r < a.rows(); ++r) {
      double m = -1e9;
      for (std::size_t c = 0; c < a.cols(); ++c) m = std::max(m, a(r, c));
      minimax = std::min(minimax, m);
    }
    for (std::size_t c = 0; c < a.cols(); ++c) {
      double m = 1e9;
      for (std::size_t r = 0; r < a.rows(); ++r) m = std::min(m, a(r, c));
      maximin = std::max(maximin, m);
    }
    const double v = solve_matrix_game(a).value;
    EXPECT_LE(v, minimax + 1e-12);
    EXPECT_GE(v, maximin - 1e-12);
  }
}

TEST(Game, FixedSelectorGivesConvexUpperBound) {
  // g(p) = max_v sum_i p_i l(x_i, t, u0, v) is convex in p and touches H at the
  // point where u0 was selected, so H(p) <= lambda g(p1) + (1 - lambda) g(p2).
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto spec = asymgame::testing::random_game(gen, 2, 4, 3);
    auto rand_belief = [&] {
      std::vector<double> w{unit(gen), unit(gen), unit(gen)};
      return Belief::normalized(w);
    };
    const auto p1 = rand_belief(), p2 = rand_belief();
    const double lam = unit(gen);
    std::vector<double> mix(3);
    for (std::size_t i = 0; i < 3; ++i) mix[i] = lam * p1[i] + (1 - lam) * p2[i];
    const auto p = Belief::normalized(mix);
    const double t = 0.5;
    const auto sol = hamiltonian(spec, t, p);
    auto g = [&](const Belief& q) {
      const auto cols = column_payoffs(payoff_matrix(spec, t, q), sol.u_star);
      return *std::max_element(cols.begin(), cols.end());
    };
    EXPECT_NEAR(g(p), sol.value, 1e-12);
    EXPECT_LE(sol.value, lam * g(p1) + (1 - lam) * g(p2) + 1e-9);
  }
}

TEST(Game, HamiltonianIsPositivelyHomogeneousInPayoff) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 30; ++trial) {
    auto spec = asymgame::testing::random_game(gen, 2, 4);
    auto scaled = spec;
    const double c = 0.25 + 3.0 * static_cast<double>(trial) / 30.0;
    scaled.payoff = spec.payoff.scaled(c);
    const Belief p({0.3, 0.7});
    EXPECT_NEAR(hamiltonian(scaled, 0.2, p).value, c * hamiltonian(spec, 0.2, p).value, 1e-9);
  }
}

TEST(Game, SpecValidation) {
  EXPECT_THROW(make_spec({{0.0}}, {1.0}, {}, {{0.0}}, "1", 1.0, 1, 1), ConfigError);
  EXPECT_THROW(make_spec({{0.0}}, {1.0}, {{0.0}}, {{0.0}}, "1", 0.0, 1, 1), ConfigError);
  EXPECT_THROW(make_spec({{0.0}}, {1.0}, {{0.0}}, {{0.0}}, "x2", 1.0, 1, 1), ConfigError);
  EXPECT_THROW(make_spec({{0.0}, {1.0}}, {1.0}, {{0.0}}, {{0.0}}, "1", 1.0, 1, 1), ConfigError);
  EXPECT_THROW(Belief({0.5, 0.6}), ConfigError);
  EXPECT_THROW(MixedAction({0.5, 0.4}), ConfigError);
}
