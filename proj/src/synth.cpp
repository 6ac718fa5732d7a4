#include "ahead/synth.hpp"

#include "ahead/errors.hpp"

#include <json.hpp>

#include <random>

namespace ahead {

void SynthConfig::validate() const {
  if (node_types.empty()) throw ConfigError("synthetic config declares no node types");
  if (num_blocks < 1) throw ConfigError("num_blocks must be at least 1");
  for (const auto& t : node_types) {
    if (t.num_nodes < 1 || t.attr_dim < 1) {
      throw ConfigError("node type " + t.name + " needs at least one node and one attribute");
    }
    if (t.views < 1 || t.views > t.attr_dim) {
      throw ConfigError("node type " + t.name + ": view count must lie in [1, attr_dim]");
    }
  }
  for (const auto& r : relations) {
    if (!(r.p_intra >= 0.0 && r.p_intra <= 1.0 && r.p_inter >= 0.0 && r.p_inter <= 1.0)) {
      throw ConfigError("relation " + r.name + ": edge probabilities must lie in [0, 1]");
    }
  }
  if (!(anomaly_ratio >= 0.0 && anomaly_ratio < 1.0)) {
    throw ConfigError("anomaly_ratio must lie in [0, 1)");
  }
}

namespace {

SynthConfig news_preset(std::string name, std::size_t news, std::size_t sources, double ratio) {
  SynthConfig c;
  c.name = std::move(name);
  c.node_types = {{"news", news, 1536, 3}, {"source", sources, 768, 2}};
  c.relations = {{"published_by", "news", "source", 0.08, 0.004}};
  c.anomaly_ratio = ratio;
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"imdb-mini", "coaid-mini", "politifact-mini", "gossipcop-mini"};
}

// Node counts are the real datasets' divided by ten for types above 1,000
// nodes; dims and view counts are kept.
SynthConfig preset(const std::string& name) {
  if (name == "imdb-mini") {
    SynthConfig c;
    c.name = name;
    c.node_types = {{"movie", 428, 3066, 2}, {"actor", 526, 3066, 3}};
    c.relations = {{"features", "movie", "actor", 0.08, 0.004}};
    c.anomaly_ratio = 0.0250;
    return c;
  }
  if (name == "coaid-mini") return news_preset(name, 546, 199, 0.1701);
  if (name == "politifact-mini") return news_preset(name, 105, 285, 0.3458);
  if (name == "gossipcop-mini") return news_preset(name, 2214, 203, 0.2217);
  throw ConfigError("unknown preset '" + name + "'");
}

SynthConfig synth_config_from_json(const std::string& text) {
  using nlohmann::json;
  SynthConfig c;
  try {
    const json j = json::parse(text);
    c.name = j.value("name", "custom");
    for (const auto& t : j.at("node_types")) {
      c.node_types.push_back({t.at("name").get<std::string>(), t.at("num_nodes").get<std::size_t>(),
                              t.at("attr_dim").get<std::size_t>(), t.value("views", std::size_t{1})});
    }
    for (const auto& r : j.value("relations", json::array())) {
      SynthRelation rel{r.at("name").get<std::string>(), r.at("src_type").get<std::string>(),
                        r.at("dst_type").get<std::string>(), 0.0, 0.0};
      if (r.contains("density")) {
        rel.p_intra = rel.p_inter = r.at("density").get<double>();
      } else {
        rel.p_intra = r.at("p_intra").get<double>();
        rel.p_inter = r.at("p_inter").get<double>();
      }
      c.relations.push_back(rel);
    }
    c.num_blocks = j.value("num_blocks", c.num_blocks);
    c.mean_base = j.value("mean_base", c.mean_base);
    c.mean_spread = j.value("mean_spread", c.mean_spread);
    c.anomaly_ratio = j.value("anomaly_ratio", c.anomaly_ratio);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed synthetic config: ") + e.what());
  }
  return c;
}

GeneratedGraph generate_with_blocks(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_block(0, cfg.num_blocks - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GeneratedGraph out;
  HetGraph& g = out.graph;
  for (const auto& t : cfg.node_types) {
    std::vector<std::size_t> blocks(t.num_nodes);
    for (auto& b : blocks) b = pick_block(rng);
    const auto d = static_cast<Eigen::Index>(t.attr_dim);
    Matrix means(static_cast<Eigen::Index>(cfg.num_blocks), d);
    for (Eigen::Index b = 0; b < means.rows(); ++b) {
      for (Eigen::Index j = 0; j < d; ++j) means(b, j) = cfg.mean_base + cfg.mean_spread * normal(rng);
    }
    Matrix x(static_cast<Eigen::Index>(t.num_nodes), d);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        x(i, j) = means(static_cast<Eigen::Index>(blocks[static_cast<std::size_t>(i)]), j) + normal(rng);
      }
    }
    g.add_node_type(t.name, std::move(x), t.views);
    out.blocks.push_back(std::move(blocks));
  }
  for (const auto& r : cfg.relations) {
    const std::size_t rel = g.add_relation(r.name, r.src_type, r.dst_type);
    const std::size_t s = g.type_index(r.src_type);
    const std::size_t d = g.type_index(r.dst_type);
    std::vector<Edge> forward;
    for (std::size_t i = 0; i < g.node_types[s].num_nodes; ++i) {
      for (std::size_t j = 0; j < g.node_types[d].num_nodes; ++j) {
        const double p = out.blocks[s][i] == out.blocks[d][j] ? r.p_intra : r.p_inter;
        if (unit(rng) < p) forward.push_back(Edge{i, j});
      }
    }
    std::vector<Edge> mirrored;
    mirrored.reserve(forward.size());
    for (const Edge& e : forward) mirrored.push_back(Edge{e.dst, e.src});
    std::sort(mirrored.begin(), mirrored.end());
    g.edges[rel] = std::move(forward);
    g.edges[g.mirror_of(rel)] = std::move(mirrored);
  }
  g.labels = g.empty_labels();
  require_valid(g);
  return out;
}

HetGraph generate(const SynthConfig& cfg) { return generate_with_blocks(cfg).graph; }

double expected_edge_count(const SynthConfig& cfg, std::size_t relation,
                           const std::vector<std::vector<std::size_t>>& blocks) {
  const auto& r = cfg.relations.at(relation);
  std::size_t s = 0;
  std::size_t d = 0;
  for (std::size_t a = 0; a < cfg.node_types.size(); ++a) {
    if (cfg.node_types[a].name == r.src_type) s = a;
    if (cfg.node_types[a].name == r.dst_type) d = a;
  }
  std::vector<double> src_counts(cfg.num_blocks, 0.0);
  std::vector<double> dst_counts(cfg.num_blocks, 0.0);
  for (std::size_t b : blocks.at(s)) src_counts[b] += 1.0;
  for (std::size_t b : blocks.at(d)) dst_counts[b] += 1.0;
  const double total = static_cast<double>(blocks[s].size()) * static_cast<double>(blocks[d].size());
  double same = 0.0;
  for (std::size_t b = 0; b < cfg.num_blocks; ++b) same += src_counts[b] * dst_counts[b];
  return same * r.p_intra + (total - same) * r.p_inter;
}

}  // namespace ahead
