#include "ahead/errors.hpp"
#include "ahead/inject.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

namespace ahead {
namespace {

std::size_t count_kind(const HetGraph& g, AnomalyKind kind) {
  std::size_t n = 0;
  for (const auto& type : g.labels) {
    for (const auto& l : type) n += l.is_anomaly && l.kind == kind;
  }
  return n;
}

HetGraph three_points() {
  HetGraph g;
  Matrix x(3, 2);
  x << 0, 0, 1, 0, 3, 4;
  g.add_node_type("t", x);
  return g;
}

TEST(AttributeInjection, CopiesFarthestCandidate) {
  // With k = 2 on three nodes the pool is every other node, so whichever node
  // is targeted the brute-force argmax over the remaining two is the answer.
  const HetGraph g = three_points();
  bool saw_origin = false;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    InjectionConfig cfg;
    cfg.attr_n = {{"t", 1}};
    cfg.attr_k = 2;
    cfg.seed = seed;
    const auto res = inject_attribute_anomalies(g, cfg);
    ASSERT_EQ(res.report.attribute.size(), 1u);
    const auto target = static_cast<Eigen::Index>(res.report.attribute[0].target.index);
    Eigen::Index best = -1;
    double best_d = -1;
    for (Eigen::Index j = 0; j < 3; ++j) {
      if (j == target) continue;
      const double d = (g.attrs[0].row(target) - g.attrs[0].row(j)).squaredNorm();
      if (d > best_d) {
        best_d = d;
        best = j;
      }
    }
    EXPECT_EQ(res.graph.attrs[0].row(target), g.attrs[0].row(best));
    EXPECT_DOUBLE_EQ(res.report.attribute[0].squared_distance, best_d);
    if (target == 0) {
      saw_origin = true;
      EXPECT_EQ(res.graph.attrs[0].row(0), (RowVector(2) << 3, 4).finished());
      EXPECT_DOUBLE_EQ(best_d, 25.0);
    }
  }
  EXPECT_TRUE(saw_origin);
}

TEST(AttributeInjection, SingletonPoolIsCopied) {
  const HetGraph g = three_points();
  InjectionConfig cfg;
  cfg.attr_n = {{"t", 1}};
  cfg.attr_k = 1;
  cfg.seed = 5;
  const auto res = inject_attribute_anomalies(g, cfg);
  const auto& a = res.report.attribute.at(0);
  EXPECT_EQ(res.graph.attrs[0].row(static_cast<Eigen::Index>(a.target.index)),
            g.attrs[0].row(static_cast<Eigen::Index>(a.source.index)));
}

TEST(AttributeInjection, ZeroCountLeavesGraphUnchanged) {
  const HetGraph g = three_points();
  InjectionConfig cfg;
  cfg.attr_n = {{"t", 0}};
  const auto res = inject_attribute_anomalies(g, cfg);
  EXPECT_EQ(res.graph.attrs, g.attrs);
  EXPECT_EQ(count_kind(res.graph, AnomalyKind::kAttribute), 0u);
  EXPECT_TRUE(res.report.attribute.empty());
}

TEST(AttributeInjection, PoolLargerThanPopulationIsRejected) {
  InjectionConfig cfg;
  cfg.attr_n = {{"t", 2}};
  cfg.attr_k = 2;
  EXPECT_THROW(inject_attribute_anomalies(three_points(), cfg), ConfigError);
}

TEST(StructuralInjection, BipartiteCliqueOfFour) {
  const HetGraph g = testing::small_graph();
  InjectionConfig cfg;
  cfg.struct_m = 4;
  cfg.struct_c = 1;
  cfg.struct_relation = "published_by";
  cfg.seed = 2;
  const auto res = inject_structural_anomalies(g, cfg);
  ASSERT_EQ(res.report.cliques.size(), 1u);
  const auto& clique = res.report.cliques[0];
  ASSERT_EQ(clique.members.size(), 4u);
  std::size_t news = 0;
  for (const auto& m : clique.members) news += m.type == 0;
  EXPECT_EQ(news, 2u);
  EXPECT_EQ(count_kind(res.graph, AnomalyKind::kStructural), 4u);
  for (const auto& s : clique.members) {
    for (const auto& d : clique.members) {
      if (s.type == 0 && d.type == 1) {
        EXPECT_EQ(res.graph.dense_adjacency(0)(static_cast<Eigen::Index>(s.index),
                                               static_cast<Eigen::Index>(d.index)),
                  1.0);
      }
    }
  }
  const std::size_t pre_existing = 4 - clique.edges_added;
  EXPECT_EQ(res.graph.edges[0].size(), g.edges[0].size() + 4 - pre_existing);
  EXPECT_EQ(res.graph.attrs, g.attrs);
  EXPECT_TRUE(validate_graph(res.graph).empty());
}

TEST(StructuralInjection, CompleteBipartiteOnEdgelessGraph) {
  HetGraph g;
  g.add_node_type("n", Matrix::Zero(5, 1));
  g.add_node_type("s", Matrix::Zero(5, 1));
  g.add_relation("r", "n", "s");
  InjectionConfig cfg;
  cfg.struct_m = 4;
  cfg.struct_c = 1;
  cfg.struct_relation = "r";
  const auto res = inject_structural_anomalies(g, cfg);
  EXPECT_EQ(res.report.cliques[0].edges_added, 4u);
  EXPECT_EQ(res.graph.edges[0].size(), 4u);
  EXPECT_EQ(res.graph.edges[1].size(), 4u);
}

TEST(StructuralInjection, ZeroCliquesLeavesGraphUnchanged) {
  const HetGraph g = testing::small_graph();
  InjectionConfig cfg;
  cfg.struct_c = 0;
  const auto res = inject_structural_anomalies(g, cfg);
  EXPECT_EQ(res.graph.edges, g.edges);
}

TEST(StructuralInjection, RejectsReverseAndUnknownRelations) {
  const HetGraph g = testing::small_graph();
  InjectionConfig cfg;
  cfg.struct_c = 1;
  cfg.struct_m = 4;
  cfg.struct_relation = reverse_relation_name("published_by");
  EXPECT_THROW(inject_structural_anomalies(g, cfg), ConfigError);
  cfg.struct_relation = "nope";
  EXPECT_THROW(inject_structural_anomalies(g, cfg), ConfigError);
}

TEST(Injection, CountsAreExactAndDisjoint) {
  const HetGraph g = testing::small_graph(4, 60, 40);
  InjectionConfig cfg;
  cfg.attr_n = {{"news", 5}, {"source", 2}};
  cfg.attr_k = 10;
  cfg.struct_m = 5;
  cfg.struct_c = 3;
  cfg.struct_relation = "published_by";
  cfg.seed = 8;
  const auto res = inject_anomalies(g, cfg);
  EXPECT_EQ(count_kind(res.graph, AnomalyKind::kAttribute), 7u);
  EXPECT_EQ(count_kind(res.graph, AnomalyKind::kStructural), 15u);
  EXPECT_TRUE(validate_graph(res.graph).empty());

  const auto again = inject_anomalies(g, cfg);
  EXPECT_TRUE(again.graph == res.graph);

  const auto report = nlohmann::json::parse(report_to_json(res.graph, res.report));
  EXPECT_EQ(report["attribute_anomalies"].size(), 7u);
  EXPECT_EQ(report["cliques"].size(), 3u);
}

TEST(Injection, InputGraphIsUntouched) {
  const HetGraph g = testing::small_graph();
  const HetGraph copy = g;
  InjectionConfig cfg;
  cfg.attr_n = {{"news", 2}};
  cfg.attr_k = 5;
  cfg.struct_c = 1;
  cfg.struct_m = 4;
  cfg.struct_relation = "published_by";
  inject_anomalies(g, cfg);
  EXPECT_TRUE(g == copy);
}

}  // namespace
}  // namespace ahead
