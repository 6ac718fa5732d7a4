#pragma once

// Synthetic heterogeneous graphs with planted community structure.
//
// Every node is assigned to one of `num_blocks` communities. Edges of a
// relation appear independently with probability p_intra when both
// endpoints share a block and p_inter otherwise. Attributes are the node's
// block mean plus unit Gaussian noise; block means are
// mean_base + mean_spread * N(0, 1) per column.

#include "ahead/hetgraph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ahead {

struct SynthNodeType {
  std::string name;
  std::size_t num_nodes = 1;
  std::size_t attr_dim = 1;
  std::size_t views = 1;
};

struct SynthRelation {
  std::string name;
  std::string src_type;
  std::string dst_type;
  double p_intra = 0.0;
  double p_inter = 0.0;
};

struct SynthConfig {
  std::string name = "custom";
  std::vector<SynthNodeType> node_types;
  std::vector<SynthRelation> relations;
  std::size_t num_blocks = 5;
  double mean_base = 3.0;
  double mean_spread = 1.0;
  /// Fraction of nodes the matching real dataset labels anomalous.
  double anomaly_ratio = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// imdb-mini, coaid-mini, politifact-mini, gossipcop-mini.
SynthConfig preset(const std::string& name);
std::vector<std::string> preset_names();

SynthConfig synth_config_from_json(const std::string& text);

struct GeneratedGraph {
  HetGraph graph;
  /// blocks[a][i]: community of node i of type a.
  std::vector<std::vector<std::size_t>> blocks;
};

GeneratedGraph generate_with_blocks(const SynthConfig& cfg);
/// Labels are present and all "none".
HetGraph generate(const SynthConfig& cfg);

/// Sum of edge probabilities of relation `relation` (index into
/// cfg.relations) under a block assignment.
double expected_edge_count(const SynthConfig& cfg, std::size_t relation,
                           const std::vector<std::vector<std::size_t>>& blocks);

}  // namespace ahead
