#include "ahead/inject.hpp"

#include "ahead/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <random>

namespace ahead {

namespace {

// Partial Fisher-Yates: `count` distinct entries of `pool`.
std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool,
                                                    std::size_t count, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

std::vector<std::size_t> unlabeled_nodes(const HetGraph& g, std::size_t type) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.node_types[type].num_nodes; ++i) {
    if (!g.labels[type][i].is_anomaly) out.push_back(i);
  }
  return out;
}

HetGraph with_labels(const HetGraph& g) {
  HetGraph out = g;
  if (!out.has_labels()) out.labels = out.empty_labels();
  return out;
}

}  // namespace

InjectionResult inject_attribute_anomalies(const HetGraph& g, const InjectionConfig& cfg) {
  require_valid(g);
  InjectionResult result{with_labels(g), {}};
  HetGraph& out = result.graph;
  if (cfg.attr_k < 1) throw ConfigError("attr_k must be at least 1");
  for (const auto& [name, n] : cfg.attr_n) {
    if (!g.find_type(name)) throw ConfigError("unknown node type '" + name + "'");
  }
  std::mt19937_64 rng(cfg.seed);
  for (std::size_t a = 0; a < out.node_types.size(); ++a) {
    auto it = cfg.attr_n.find(out.node_types[a].name);
    if (it == cfg.attr_n.end() || it->second == 0) continue;
    const std::size_t n = it->second;
    const std::size_t population = out.node_types[a].num_nodes;
    if (n + cfg.attr_k > population) {
      throw ConfigError("node type " + out.node_types[a].name + ": attr_n + attr_k = " +
                        std::to_string(n + cfg.attr_k) + " exceeds " +
                        std::to_string(population) + " nodes");
    }
    auto free_nodes = unlabeled_nodes(out, a);
    if (free_nodes.size() < n) {
      throw ConfigError("node type " + out.node_types[a].name +
                        ": not enough unlabeled nodes for attribute anomalies");
    }
    const Matrix original = out.attrs[a];
    for (std::size_t target : sample_without_replacement(free_nodes, n, rng)) {
      std::vector<std::size_t> others;
      others.reserve(population - 1);
      for (std::size_t j = 0; j < population; ++j) {
        if (j != target) others.push_back(j);
      }
      const auto pool = sample_without_replacement(std::move(others), cfg.attr_k, rng);
      std::size_t best = pool.front();
      double best_d = -1.0;
      const auto ti = static_cast<Eigen::Index>(target);
      for (std::size_t j : pool) {
        const double d = (original.row(ti) - original.row(static_cast<Eigen::Index>(j))).squaredNorm();
        if (d > best_d) {
          best_d = d;
          best = j;
        }
      }
      out.attrs[a].row(ti) = original.row(static_cast<Eigen::Index>(best));
      out.labels[a][target] = NodeLabel{true, AnomalyKind::kAttribute};
      result.report.attribute.push_back(AttributeInjection{{a, target}, {a, best}, best_d});
    }
  }
  return result;
}

InjectionResult inject_structural_anomalies(const HetGraph& g, const InjectionConfig& cfg) {
  require_valid(g);
  InjectionResult result{with_labels(g), {}};
  if (cfg.struct_c == 0) return result;
  HetGraph& out = result.graph;
  if (cfg.struct_m < 2) throw ConfigError("struct_m must be at least 2");
  auto rel = out.find_relation(cfg.struct_relation);
  if (!rel) throw ConfigError("unknown relation '" + cfg.struct_relation + "'");
  if (out.relations[*rel].is_reverse()) {
    throw ConfigError("structural anomalies must use a declared relation");
  }
  const std::size_t src = out.src_type_index(*rel);
  const std::size_t dst = out.dst_type_index(*rel);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  for (std::size_t c = 0; c < cfg.struct_c; ++c) {
    CliqueInjection clique;
    if (src == dst) {
      auto free_nodes = unlabeled_nodes(out, src);
      if (free_nodes.size() < cfg.struct_m) {
        throw ConfigError("not enough unlabeled nodes for structural anomalies");
      }
      auto members = sample_without_replacement(free_nodes, cfg.struct_m, rng);
      std::sort(members.begin(), members.end());
      for (std::size_t i : members) {
        for (std::size_t j : members) {
          if (i != j && out.add_edge(*rel, i, j)) ++clique.edges_added;
        }
        clique.members.push_back({src, i});
      }
    } else {
      const std::size_t m_src = (cfg.struct_m + 1) / 2;
      const std::size_t m_dst = cfg.struct_m / 2;
      auto free_src = unlabeled_nodes(out, src);
      auto free_dst = unlabeled_nodes(out, dst);
      if (free_src.size() < m_src || free_dst.size() < m_dst) {
        throw ConfigError("not enough unlabeled nodes for structural anomalies on relation " +
                          cfg.struct_relation);
      }
      auto s_nodes = sample_without_replacement(free_src, m_src, rng);
      auto d_nodes = sample_without_replacement(free_dst, m_dst, rng);
      std::sort(s_nodes.begin(), s_nodes.end());
      std::sort(d_nodes.begin(), d_nodes.end());
      for (std::size_t i : s_nodes) {
        for (std::size_t j : d_nodes) {
          if (out.add_edge(*rel, i, j)) ++clique.edges_added;
        }
      }
      for (std::size_t i : s_nodes) clique.members.push_back({src, i});
      for (std::size_t j : d_nodes) clique.members.push_back({dst, j});
    }
    for (const NodeRef& r : clique.members) {
      out.labels[r.type][r.index] = NodeLabel{true, AnomalyKind::kStructural};
    }
    result.report.cliques.push_back(std::move(clique));
  }
  return result;
}

InjectionResult inject_anomalies(const HetGraph& g, const InjectionConfig& cfg) {
  InjectionResult attr = inject_attribute_anomalies(g, cfg);
  InjectionResult both = inject_structural_anomalies(attr.graph, cfg);
  both.report.attribute = std::move(attr.report.attribute);
  return both;
}

std::string report_to_json(const HetGraph& g, const InjectionReport& report) {
  using nlohmann::json;
  json j;
  j["attribute_anomalies"] = json::array();
  for (const auto& a : report.attribute) {
    j["attribute_anomalies"].push_back({{"type", g.node_types[a.target.type].name},
                                        {"node", a.target.index},
                                        {"copied_from", a.source.index},
                                        {"squared_distance", a.squared_distance}});
  }
  j["cliques"] = json::array();
  for (const auto& c : report.cliques) {
    json members = json::array();
    for (const auto& m : c.members) {
      members.push_back({{"type", g.node_types[m.type].name}, {"node", m.index}});
    }
    j["cliques"].push_back({{"members", members}, {"edges_added", c.edges_added}});
  }
  return j.dump(2);
}

}  // namespace ahead
