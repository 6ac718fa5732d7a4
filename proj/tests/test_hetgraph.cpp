#include "ahead/errors.hpp"
#include "ahead/hetgraph.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>

namespace ahead {
namespace {

HetGraph two_type_graph() {
  HetGraph g;
  Matrix c(3, 2);
  c << 1, 2, 3, 4, 5, 6;
  Matrix s(2, 3);
  s << 0.5, -1, 2, 0.25, 1e-17, 3.141592653589793;
  g.add_node_type("C", c);
  g.add_node_type("S", s);
  const std::size_t r = g.add_relation("cites", "C", "S");
  g.add_edge(r, 0, 1);
  g.add_edge(r, 2, 0);
  g.add_edge(r, 1, 1);
  g.labels = g.empty_labels();
  g.labels[0][1] = {true, AnomalyKind::kAttribute};
  g.labels[1][0] = {true, AnomalyKind::kStructural};
  return g;
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v) {
    if (s.find(needle) != std::string::npos) return true;
  }
  return false;
}

TEST(HetGraph, WellFormedGraphHasNoViolations) {
  EXPECT_TRUE(validate_graph(two_type_graph()).empty());
}

TEST(HetGraph, OutOfRangeEdgeIsReported) {
  HetGraph g = two_type_graph();
  g.edges[0].push_back({5, 0});
  g.edges[1].push_back({0, 5});
  EXPECT_TRUE(any_contains(validate_graph(g), "edge index out of range"));
  EXPECT_THROW(g.add_edge(0, 5, 0), DataError);
}

TEST(HetGraph, NonTransposedReverseIsReported) {
  HetGraph g = two_type_graph();
  g.edges[1].pop_back();
  EXPECT_TRUE(any_contains(validate_graph(g), "reverse relation mismatch"));
}

TEST(HetGraph, ReverseRelationIsTheTranspose) {
  const HetGraph g = two_type_graph();
  ASSERT_EQ(g.relations.size(), 2u);
  EXPECT_TRUE(g.relations[1].is_reverse());
  EXPECT_EQ(g.mirror_of(0), 1u);
  EXPECT_EQ(g.mirror_of(1), 0u);
  EXPECT_EQ(g.dense_adjacency(0), g.dense_adjacency(1).transpose());
  EXPECT_EQ(g.declared_relations(), std::vector<std::size_t>{0});
}

TEST(HetGraph, DuplicateEdgeIsIgnored) {
  HetGraph g = two_type_graph();
  EXPECT_FALSE(g.add_edge(0, 0, 1));
  EXPECT_EQ(g.edges[0].size(), 3u);
}

TEST(GlobalIndex, ConcatenatesTypeBlocks) {
  HetGraph g;
  g.add_node_type("C", Matrix::Zero(3, 1));
  g.add_node_type("S", Matrix::Zero(2, 1));
  const GlobalNodeIndex idx = global_index(g);
  EXPECT_EQ(idx.size(), 5u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(idx.to_global(0, i), i);
  EXPECT_EQ(idx.to_global(1, 0), 3u);
  EXPECT_EQ(idx.to_global(1, 1), 4u);
  EXPECT_EQ(idx.to_local(4), std::make_pair(std::size_t{1}, std::size_t{1}));
}

TEST(GlobalIndex, SingleNodeIsIdentity) {
  HetGraph g;
  g.add_node_type("t", Matrix::Zero(1, 1));
  const GlobalNodeIndex idx = global_index(g);
  EXPECT_EQ(idx.to_global(0, 0), 0u);
  EXPECT_EQ(idx.to_local(0), std::make_pair(std::size_t{0}, std::size_t{0}));
}

TEST(Bundle, RoundTripIsExact) {
  testing::TempDir dir("bundle");
  const HetGraph g = two_type_graph();
  save_bundle(g, dir.path());
  const HetGraph back = load_bundle(dir.path());
  EXPECT_TRUE(back == g);
  EXPECT_EQ(back.attrs[1](1, 1), 1e-17);
  const GlobalNodeIndex a(g);
  const GlobalNodeIndex b(back);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.to_local(i), b.to_local(i));
}

TEST(Bundle, WrongColumnCountIsShapeMismatch) {
  testing::TempDir dir("bundle_bad");
  save_bundle(two_type_graph(), dir.path());
  std::ofstream(dir / "attrs/C.csv") << "1,2\n3,4,5\n5,6\n";
  try {
    load_bundle(dir.path());
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("shape mismatch"), std::string::npos) << e.what();
  }
}

TEST(Bundle, MissingDirectoryIsDataError) {
  EXPECT_THROW(load_bundle("/nonexistent/ahead/bundle"), DataError);
}

TEST(Views, ContiguousNearEqualChunks) {
  const auto v = contiguous_views(7, 2);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].size() + v[1].size(), 7u);
  EXPECT_LE(std::max(v[0].size(), v[1].size()) - std::min(v[0].size(), v[1].size()), 1u);
  EXPECT_THROW(contiguous_views(2, 3), ConfigError);
}

TEST(Labels, KindNamesRoundTrip) {
  for (AnomalyKind k : {AnomalyKind::kNone, AnomalyKind::kAttribute, AnomalyKind::kStructural}) {
    EXPECT_EQ(anomaly_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(anomaly_kind_from_string("weird"), DataError);
}

TEST(FormatReal, SeventeenSignificantDigitsRoundTrip) {
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_real(x)), x);
}

}  // namespace
}  // namespace ahead
