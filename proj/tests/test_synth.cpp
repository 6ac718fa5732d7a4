#include "ahead/errors.hpp"
#include "ahead/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace ahead {
namespace {

SynthConfig bipartite(std::size_t n_src, std::size_t n_dst, double density) {
  SynthConfig cfg;
  cfg.node_types = {{"a", n_src, 2, 1}, {"b", n_dst, 2, 1}};
  cfg.relations = {{"r", "a", "b", density, density}};
  return cfg;
}

TEST(Synth, DensityZeroHasNoEdges) {
  const HetGraph g = generate(bipartite(10, 7, 0.0));
  EXPECT_TRUE(g.edges[0].empty());
  EXPECT_TRUE(g.edges[1].empty());
}

TEST(Synth, DensityOneIsCompleteBipartite) {
  const HetGraph g = generate(bipartite(3, 2, 1.0));
  EXPECT_EQ(g.edges[0].size(), 6u);
  EXPECT_EQ(g.dense_adjacency(0), Matrix::Ones(3, 2));
}

TEST(Synth, DeterministicAndValid) {
  for (const std::string& name : preset_names()) {
    SynthConfig cfg = preset(name);
    if (cfg.node_types[0].num_nodes > 1000) continue;
    cfg.seed = 11;
    const HetGraph a = generate(cfg);
    EXPECT_TRUE(validate_graph(a).empty()) << name;
    EXPECT_TRUE(a == generate(cfg)) << name;
  }
}

TEST(Synth, EdgeCountWithinFiveSigma) {
  for (std::uint64_t seed : {1, 2, 3}) {
    SynthConfig cfg = preset("coaid-mini");
    cfg.seed = seed;
    const GeneratedGraph gg = generate_with_blocks(cfg);
    // Independent Bernoulli edges: variance is the sum of p (1 - p).
    double mean = 0.0;
    double var = 0.0;
    const auto& rel = cfg.relations[0];
    const auto& bs = gg.blocks[0];
    const auto& bd = gg.blocks[1];
    for (std::size_t i = 0; i < bs.size(); ++i) {
      for (std::size_t j = 0; j < bd.size(); ++j) {
        const double p = bs[i] == bd[j] ? rel.p_intra : rel.p_inter;
        mean += p;
        var += p * (1 - p);
      }
    }
    EXPECT_NEAR(expected_edge_count(cfg, 0, gg.blocks), mean, 1e-6);
    const double observed = static_cast<double>(gg.graph.edges[0].size());
    EXPECT_LE(std::abs(observed - mean), 5.0 * std::sqrt(var)) << "seed " << seed;
  }
}

TEST(Synth, AttributesFollowBlockMeans) {
  SynthConfig cfg = bipartite(400, 5, 0.0);
  cfg.num_blocks = 2;
  cfg.node_types[0].attr_dim = 3;
  const GeneratedGraph gg = generate_with_blocks(cfg);
  // Same-block rows differ by noise only: mean squared gap near 2 per column.
  double same = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 1; i < 400; ++i) {
    if (gg.blocks[0][i] != gg.blocks[0][0]) continue;
    same += (gg.graph.attrs[0].row(static_cast<Eigen::Index>(i)) - gg.graph.attrs[0].row(0)).squaredNorm();
    ++n;
  }
  ASSERT_GT(n, 50u);
  EXPECT_LT(same / static_cast<double>(n), 2.0 * 3 * 1.6);
}

TEST(Synth, LabelsStartNormal) {
  const HetGraph g = generate(bipartite(4, 3, 0.5));
  ASSERT_TRUE(g.has_labels());
  for (const auto& t : g.labels) {
    for (const auto& l : t) EXPECT_FALSE(l.is_anomaly);
  }
}

TEST(Presets, ImdbHasTwoAndThreeViews) {
  const SynthConfig cfg = preset("imdb-mini");
  ASSERT_EQ(cfg.node_types.size(), 2u);
  EXPECT_EQ(cfg.node_types[0].views, 2u);
  EXPECT_EQ(cfg.node_types[1].views, 3u);
}

TEST(Presets, NewsPresetsHaveThreeAndTwoViews) {
  for (const char* name : {"coaid-mini", "politifact-mini", "gossipcop-mini"}) {
    const SynthConfig cfg = preset(name);
    EXPECT_EQ(cfg.node_types[0].attr_dim, 1536u) << name;
    EXPECT_EQ(cfg.node_types[0].views, 3u) << name;
    EXPECT_EQ(cfg.node_types[1].views, 2u) << name;
  }
  EXPECT_DOUBLE_EQ(preset("politifact-mini").anomaly_ratio, 0.3458);
  const SynthConfig coaid = preset("coaid-mini");
  EXPECT_EQ(coaid.node_types[0].num_nodes + coaid.node_types[1].num_nodes, 745u);
}

TEST(Presets, UnknownNameIsRejected) {
  EXPECT_THROW(preset("cora-mini"), ConfigError);
}

TEST(SynthConfig, JsonWithDensityShortcut) {
  const SynthConfig cfg = synth_config_from_json(R"({
    "name": "tiny",
    "node_types": [{"name": "a", "num_nodes": 4, "attr_dim": 3, "views": 1},
                   {"name": "b", "num_nodes": 3, "attr_dim": 2}],
    "relations": [{"name": "r", "src_type": "a", "dst_type": "b", "density": 1.0}],
    "seed": 5
  })");
  EXPECT_EQ(cfg.relations[0].p_intra, 1.0);
  EXPECT_EQ(cfg.relations[0].p_inter, 1.0);
  EXPECT_EQ(generate(cfg).edges[0].size(), 12u);
}

TEST(SynthConfig, RejectsInvalidProbabilities) {
  SynthConfig cfg = bipartite(2, 2, 1.5);
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(synth_config_from_json("{not json"), ConfigError);
}

}  // namespace
}  // namespace ahead
