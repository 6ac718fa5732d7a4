#include "ahead/errors.hpp"
#include "ahead/preprocess.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

namespace ahead {
namespace {

HetGraph graph_with_dims(std::size_t dim_a, std::size_t dim_b = 2) {
  HetGraph g;
  Matrix a(4, static_cast<Eigen::Index>(dim_a));
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = 0.5 * static_cast<double>(i) - 3.0;
  g.add_node_type("a", a);
  g.add_node_type("b", Matrix::Ones(3, static_cast<Eigen::Index>(dim_b)));
  return g;
}

std::vector<std::size_t> sizes(const std::vector<std::vector<std::size_t>>& views) {
  std::vector<std::size_t> out;
  for (const auto& v : views) out.push_back(v.size());
  std::sort(out.begin(), out.end());
  return out;
}

void expect_partition(const std::vector<std::vector<std::size_t>>& views, std::size_t dim) {
  std::set<std::size_t> seen;
  for (const auto& v : views) {
    for (std::size_t c : v) EXPECT_TRUE(seen.insert(c).second) << "column " << c << " repeated";
  }
  EXPECT_EQ(seen.size(), dim);
  EXPECT_EQ(*seen.rbegin(), dim - 1);
}

TEST(SplitViews, EqualSplit) {
  const auto p = split_views(graph_with_dims(6), {{"a", 3}}, 17);
  EXPECT_EQ(sizes(p.columns[0]), (std::vector<std::size_t>{2, 2, 2}));
  EXPECT_EQ(p.columns[1].size(), 1u);
  expect_partition(p.columns[0], 6);
}

TEST(SplitViews, NearEqualSplit) {
  const auto p = split_views(graph_with_dims(7), {{"a", 2}}, 4);
  EXPECT_EQ(sizes(p.columns[0]), (std::vector<std::size_t>{3, 4}));
  expect_partition(p.columns[0], 7);
}

TEST(SplitViews, NewsDimensionGivesThreeViewsOf512) {
  const auto p = split_views(graph_with_dims(1536), {{"a", 3}}, 1);
  EXPECT_EQ(sizes(p.columns[0]), (std::vector<std::size_t>{512, 512, 512}));
  expect_partition(p.columns[0], 1536);
}

TEST(SplitViews, DeterministicPerSeed) {
  const HetGraph g = graph_with_dims(20);
  EXPECT_EQ(split_views(g, {{"a", 3}}, 9).columns, split_views(g, {{"a", 3}}, 9).columns);
  EXPECT_NE(split_views(g, {{"a", 3}}, 9).columns, split_views(g, {{"a", 3}}, 10).columns);
}

TEST(SplitViews, RejectsBadCounts) {
  const HetGraph g = graph_with_dims(3);
  EXPECT_THROW(split_views(g, {{"a", 4}}, 0), ConfigError);
  EXPECT_THROW(split_views(g, {{"a", 0}}, 0), ConfigError);
  EXPECT_THROW(split_views(g, {{"zzz", 1}}, 0), ConfigError);
}

TEST(SplitViews, ReassemblyIsBitExact) {
  const HetGraph g = graph_with_dims(11);
  const auto p = split_views(g, {{"a", 3}, {"b", 2}}, 5);
  for (std::size_t a = 0; a < 2; ++a) {
    Matrix rebuilt = Matrix::Constant(g.attrs[a].rows(), g.attrs[a].cols(), -999.0);
    for (std::size_t v = 0; v < p.columns[a].size(); ++v) {
      const Matrix slice = view_slice(g, p, a, v);
      for (std::size_t j = 0; j < p.columns[a][v].size(); ++j) {
        rebuilt.col(static_cast<Eigen::Index>(p.columns[a][v][j])) =
            slice.col(static_cast<Eigen::Index>(j));
      }
    }
    EXPECT_EQ(rebuilt, g.attrs[a]);
  }
}

TEST(SplitViews, PartitionIsRecordedInSchema) {
  const HetGraph g = graph_with_dims(6);
  const auto p = split_views(g, {{"a", 3}}, 2);
  const HetGraph h = apply_partition(g, p);
  EXPECT_EQ(partition_of(h).columns, p.columns);
  EXPECT_EQ(h.node_types[0].view_dims(), (std::vector<std::size_t>{2, 2, 2}));
}

TEST(ViewSlice, PicksListedColumns) {
  HetGraph g;
  Matrix x(2, 3);
  x << 1, 2, 3, 4, 5, 6;
  g.add_node_type("t", x);
  ViewPartition p;
  p.columns = {{{0, 2}, {1}}};
  Matrix expected(2, 2);
  expected << 1, 3, 4, 6;
  EXPECT_EQ(view_slice(g, p, 0, 0), expected);
}

TEST(ViewSlice, SingleViewCoversEveryColumn) {
  const HetGraph g = graph_with_dims(5);
  const auto p = split_views(g, {}, 3);
  const Matrix s = view_slice(g, p, 0, 0);
  EXPECT_EQ(s.cols(), 5);
  EXPECT_DOUBLE_EQ(s.sum(), g.attrs[0].sum());
}

TEST(Standardize, ColumnOneTwoThree) {
  HetGraph g;
  Matrix x(3, 2);
  x << 1, 7, 2, 7, 3, 7;
  g.add_node_type("t", x);
  const Matrix s = standardize(g).attrs[0];
  EXPECT_NEAR(s(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(s(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(s(2, 0), 1.0, 1e-15);
  EXPECT_EQ(s.col(1), Eigen::VectorXd::Zero(3));
}

TEST(Standardize, Idempotent) {
  const HetGraph once = standardize(graph_with_dims(4));
  const HetGraph twice = standardize(once);
  EXPECT_LE((once.attrs[0] - twice.attrs[0]).cwiseAbs().maxCoeff(), 1e-12);
}

}  // namespace
}  // namespace ahead
