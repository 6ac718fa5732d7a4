#pragma once

// Ground-truth anomaly injection.
//
// Attribute anomalies: a selected node's attributes are overwritten by those
// of the farthest (squared Euclidean) node among k random same-type peers.
// Structural anomalies: c node-disjoint groups of m nodes are wired into a
// complete bipartite block under one relation.

#include "ahead/hetgraph.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ahead {

struct InjectionConfig {
  std::map<std::string, std::size_t> attr_n;
  std::size_t attr_k = 50;
  std::size_t struct_m = 15;
  std::size_t struct_c = 0;
  std::string struct_relation;
  std::uint64_t seed = 0;
};

struct NodeRef {
  std::size_t type = 0;
  std::size_t index = 0;
  auto operator<=>(const NodeRef&) const = default;
};

struct AttributeInjection {
  NodeRef target;
  /// Peer whose attributes were copied onto the target.
  NodeRef source;
  double squared_distance = 0.0;
};

struct CliqueInjection {
  std::vector<NodeRef> members;
  std::size_t edges_added = 0;
};

struct InjectionReport {
  std::vector<AttributeInjection> attribute;
  std::vector<CliqueInjection> cliques;
};

struct InjectionResult {
  /// Carries the merged labels in `graph.labels`.
  HetGraph graph;
  InjectionReport report;
};

/// Nodes already labeled anomalous in g are never selected again.
InjectionResult inject_attribute_anomalies(const HetGraph& g, const InjectionConfig& cfg);
InjectionResult inject_structural_anomalies(const HetGraph& g, const InjectionConfig& cfg);
/// Attribute injection followed by structural injection on disjoint nodes.
InjectionResult inject_anomalies(const HetGraph& g, const InjectionConfig& cfg);

std::string report_to_json(const HetGraph& g, const InjectionReport& report);

}  // namespace ahead
