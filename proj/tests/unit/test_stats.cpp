#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace autoen;

namespace {

ScoreTable table(std::vector<std::vector<double>> scores, Direction dir = Direction::HigherBetter) {
  ScoreTable t;
  for (std::size_t m = 0; m < scores.size(); ++m) t.methods.push_back("m" + std::to_string(m));
  for (std::size_t d = 0; d < scores.front().size(); ++d) t.datasets.push_back("d" + std::to_string(d));
  t.scores = std::move(scores);
  t.direction = dir;
  return t;
}

ScoreTable random_table(std::mt19937_64& rng, std::size_t k, std::size_t n) {
  std::vector<std::vector<double>> s(k, std::vector<double>(n));
  for (auto& row : s)
    for (auto& v : row) v = static_cast<double>(rng() % 5) / 4.0;
  return table(s);
}

}  // namespace

TEST(Ranks, StrictWinner) {
  auto r = average_ranks(table({{0.9, 0.8}, {0.1, 0.2}}));
  EXPECT_EQ(r.average_ranks, (std::vector<double>{1.0, 2.0}));
}

TEST(Ranks, FullTie) {
  auto r = average_ranks(table({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}}));
  for (double v : r.average_ranks) EXPECT_EQ(v, 2.5);
  auto f = friedman_test(r);
  EXPECT_TRUE(f.degenerate);
  EXPECT_EQ(f.statistic, 0.0);
  EXPECT_EQ(f.p_value, 1.0);
}

TEST(Ranks, LowerIsBetterDirection) {
  auto r = average_ranks(table({{0.2, 0.3}, {0.5, 0.1}}, Direction::LowerBetter));
  EXPECT_EQ(r.ranks[0], (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(r.ranks[1], (std::vector<double>{2.0, 1.0}));
}

TEST(Ranks, InvalidTables) {
  EXPECT_THROW(average_ranks(table({{1, 2}})), Error);
  EXPECT_THROW(average_ranks(table({{1}, {2}})), Error);
  EXPECT_THROW(average_ranks(table({{1, std::nan("")}, {2, 3}})), Error);
}

TEST(Ranks, ColumnSumsAndDirectionFlip) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t k = 2 + rng() % 8, n = 2 + rng() % 10;
    auto t = random_table(rng, k, n);
    auto r = average_ranks(t);
    for (std::size_t d = 0; d < n; ++d) {
      double s = 0;
      for (std::size_t m = 0; m < k; ++m) s += r.ranks[m][d];
      EXPECT_DOUBLE_EQ(s, k * (k + 1) / 2.0);
    }
    auto neg = t;
    neg.direction = Direction::LowerBetter;
    for (auto& row : neg.scores)
      for (auto& v : row) v = -v;
    auto rn = average_ranks(neg);
    EXPECT_EQ(rn.ranks, r.ranks);

    auto mono = t;
    for (auto& row : mono.scores)
      for (auto& v : row) v = std::exp(3.0 * v) - 7.0;
    EXPECT_EQ(friedman_test(average_ranks(mono)).statistic, friedman_test(r).statistic);
  }
}

TEST(Friedman, ThreeMethodsFourDatasets) {
  auto r = average_ranks(table({{3, 3, 3, 3}, {2, 2, 2, 2}, {1, 1, 1, 1}}));
  auto f = friedman_test(r);
  EXPECT_NEAR(f.statistic, 8.0, 1e-12);
  EXPECT_EQ(f.df, 2u);
  // chi-square with 2 df has survival exp(-x/2)
  EXPECT_NEAR(f.p_value, std::exp(-4.0), 1e-12);
  EXPECT_NEAR(f.p_value, 0.0183, 1e-4);
}

TEST(Friedman, ChiSquareTailAgainstClosedForms) {
  for (double x : {0.01, 0.5, 1.0, 2.5, 7.0, 15.0, 40.0}) {
    EXPECT_NEAR(chi_square_sf(x, 1), std::erfc(std::sqrt(x / 2)), 1e-12) << x;
    EXPECT_NEAR(chi_square_sf(x, 2), std::exp(-x / 2), 1e-12) << x;
    EXPECT_NEAR(chi_square_sf(x, 4), std::exp(-x / 2) * (1 + x / 2), 1e-12) << x;
    EXPECT_NEAR(chi_square_sf(x, 6), std::exp(-x / 2) * (1 + x / 2 + x * x / 8), 1e-12) << x;
  }
}

TEST(Holm, TwoMethodsIsUnadjusted) {
  auto r = average_ranks(table({{1, 2, 1}, {2, 1, 0}}));
  auto rows = holm_posthoc(r, 0);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].p_adjusted, rows[0].p_raw);
  double z = (r.average_ranks[0] - r.average_ranks[1]) / std::sqrt(2.0 * 3.0 / (6.0 * 3.0));
  EXPECT_NEAR(rows[0].z, z, 1e-12);
}

TEST(Holm, EqualRankGivesOne) {
  auto r = average_ranks(table({{1, 0}, {0, 1}, {0.5, 0.5}}));
  auto rows = holm_posthoc(r, 0);
  for (const auto& h : rows)
    if (h.method == "m1") {
      EXPECT_EQ(h.z, 0.0);
      EXPECT_EQ(h.p_adjusted, 1.0);
      EXPECT_FALSE(h.reject);
    }
}

TEST(Holm, StepDownProperties) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t k = 3 + rng() % 7, n = 3 + rng() % 20;
    auto r = average_ranks(random_table(rng, k, n));
    std::size_t control = rng() % k;
    auto rows = holm_posthoc(r, control);
    ASSERT_EQ(rows.size(), k - 1);
    const double m = static_cast<double>(k - 1);
    double running = 0.0;
    bool rejecting = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      EXPECT_NE(rows[i].method, r.methods[control]);
      EXPECT_GE(rows[i].p_adjusted, rows[i].p_raw);
      if (i) {
        EXPECT_GE(rows[i].p_raw, rows[i - 1].p_raw);
        EXPECT_GE(rows[i].p_adjusted, rows[i - 1].p_adjusted);
      }
      running = std::max(running, std::min(1.0, (m - static_cast<double>(i)) * rows[i].p_raw));
      EXPECT_DOUBLE_EQ(rows[i].p_adjusted, running);
      rejecting = rejecting && running <= 0.05;
      EXPECT_EQ(rows[i].reject, rejecting);
    }
  }
}

TEST(ScoreCsv, ParseAndRoundTrip) {
  auto t = parse_score_csv("# note\ndataset,A,B\nx,0.9,0.8\ny,0.7,0.75\n", Direction::HigherBetter);
  EXPECT_EQ(t.methods, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(t.datasets, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(t.scores[1][1], 0.75);
  auto back = parse_score_csv(score_table_csv(t), Direction::HigherBetter);
  EXPECT_EQ(back.scores, t.scores);
  EXPECT_EQ(t.method_index("B"), 1u);
  EXPECT_THROW(t.method_index("C"), Error);
  EXPECT_THROW(parse_direction("sideways"), Error);
}

TEST(ScoreCsv, BinaryFixtureControlRank) {
  auto t = load_score_csv(autoen::testing::source_path("fixtures/table5_binary.csv"), Direction::HigherBetter);
  EXPECT_EQ(t.k(), 9u);
  EXPECT_EQ(t.n(), 16u);
  auto r = average_ranks(t);
  EXPECT_NEAR(r.average_ranks[t.method_index("AutoSkl_4h")], 3.0, 1e-12);
}
