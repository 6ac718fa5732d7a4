#include "ahead/errors.hpp"
#include "ahead/metrics.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <random>

namespace ahead {
namespace {

TEST(Auc, PerfectRanking) {
  EXPECT_DOUBLE_EQ(auc({0.9, 0.8, 0.1, 0.2}, {true, true, false, false}), 1.0);
  EXPECT_DOUBLE_EQ(auc({0.1, 0.2, 0.9, 0.8}, {true, true, false, false}), 0.0);
}

TEST(Auc, AllTiedIsOneHalf) {
  EXPECT_DOUBLE_EQ(auc({1.0, 1.0, 1.0, 1.0}, {true, false, true, false}), 0.5);
}

TEST(Auc, ThreeOneTwoPairEnumeration) {
  EXPECT_DOUBLE_EQ(auc({3, 1, 2}, {true, false, true}), 1.0);
}

TEST(Auc, PartialTiesCountOneHalf) {
  // Pairs (a, n): (2 vs 2) tie, (2 vs 1) win, (0 vs 2) loss, (0 vs 1) loss.
  EXPECT_DOUBLE_EQ(auc({2, 0, 2, 1}, {true, true, false, false}), 1.5 / 4.0);
}

TEST(Auc, MatchesBruteForceOnRandomTiedData) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> value(0, 9);
  std::bernoulli_distribution label(0.3);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> s(60);
    std::vector<bool> y(60);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = value(rng);
      y[i] = label(rng);
    }
    y[0] = true;
    y[1] = false;
    EXPECT_NEAR(auc(s, y), oracle::auc(s, y), 1e-12);
  }
}

TEST(Auc, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> s(80);
  std::vector<bool> y(80);
  for (std::size_t i = 0; i < s.size(); ++i) {
    y[i] = i % 4 == 0;
    s[i] = n(rng) + (y[i] ? 0.8 : 0.0);
  }
  std::vector<double> t(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) t[i] = std::exp(3.0 * s[i]) + 7.0;
  EXPECT_DOUBLE_EQ(auc(s, y), auc(t, y));
}

TEST(Auc, NegatedScoresComplement) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(50);
  std::vector<double> neg(50);
  std::vector<bool> y(50);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = u(rng);
    neg[i] = -s[i];
    y[i] = i % 3 == 0;
  }
  EXPECT_NEAR(auc(s, y) + auc(neg, y), 1.0, 1e-12);
}

TEST(Auc, SingleClassIsAnError) {
  EXPECT_THROW(auc({1.0, 2.0}, {false, false}), DataError);
  EXPECT_THROW(auc({1.0, 2.0}, {true, true}), DataError);
  EXPECT_THROW(auc({1.0}, {true, false}), DataError);
  EXPECT_THROW(auc({NAN, 1.0}, {true, false}), DataError);
}

TEST(RocCurve, RunsFromOriginToOneOne) {
  const auto c = roc_curve({0.9, 0.5, 0.5, 0.1}, {true, false, true, false});
  ASSERT_GE(c.size(), 2u);
  EXPECT_EQ(c.front(), std::make_pair(0.0, 0.0));
  EXPECT_EQ(c.back(), std::make_pair(1.0, 1.0));
  // Trapezoids under the curve reproduce the AUC.
  double area = 0.0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    area += (c[i].first - c[i - 1].first) * (c[i].second + c[i - 1].second) / 2.0;
  }
  EXPECT_NEAR(area, auc({0.9, 0.5, 0.5, 0.1}, {true, false, true, false}), 1e-12);
}

TEST(Evaluate, PerKindAgainstAllNormals) {
  const std::vector<double> s = {0.9, 0.2, 0.6, 0.1, 0.5};
  const std::vector<NodeLabel> l = {{true, AnomalyKind::kAttribute},
                                    {true, AnomalyKind::kStructural},
                                    {false, AnomalyKind::kNone},
                                    {false, AnomalyKind::kNone},
                                    {false, AnomalyKind::kNone}};
  const MetricsReport m = evaluate(s, l);
  EXPECT_EQ(m.n_nodes, 5u);
  EXPECT_EQ(m.n_anomalies.at("total"), 2u);
  EXPECT_EQ(m.n_anomalies.at("attr"), 1u);
  EXPECT_EQ(m.n_anomalies.at("struct"), 1u);
  EXPECT_DOUBLE_EQ(m.auc_by_kind.at("attr"), 1.0);
  EXPECT_DOUBLE_EQ(m.auc_by_kind.at("struct"), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.auc, oracle::auc(s, {true, true, false, false, false}));
}

TEST(Evaluate, JsonHasTheFixedFields) {
  const MetricsReport m = evaluate({0.3, 0.1}, {{true, AnomalyKind::kAttribute}, {}});
  const auto j = nlohmann::json::parse(to_json(m));
  for (const char* key : {"auc", "auc_by_kind", "n_anomalies", "n_nodes", "seed", "config", "wall_seconds"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j.size(), 7u);
  EXPECT_DOUBLE_EQ(j["auc"].get<double>(), 1.0);
}

TEST(Evaluate, NoAnomaliesIsSingleClassError) {
  try {
    evaluate({0.3, 0.1}, {{}, {}});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("class"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace ahead
