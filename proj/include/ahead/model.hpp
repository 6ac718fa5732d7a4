#pragma once

// Full forward pass: view projections -> one encoder run per view
// combination -> output projection and view-level attention -> decoders.

#include "ahead/aggregate.hpp"
#include "ahead/decode.hpp"
#include "ahead/encoder.hpp"
#include "ahead/hetgraph.hpp"
#include "ahead/params.hpp"
#include "ahead/preprocess.hpp"

#include <cstdint>
#include <string>

namespace ahead {

struct ModelConfig {
  EncoderConfig encoder;
  AggregatorConfig aggregator;
  LossKind loss = LossKind::kFrobenius;
  /// Decoders whose loss term is trained (and whose score term is used).
  DecoderMask decoders;
  /// Dense reconstruction refuses node types larger than this.
  std::size_t dense_node_budget = 50000;

  void validate() const;
};

std::string to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& text);

/// Deterministic per seed: Glorot weights, zero biases, mu = 1, alpha = 0,
/// W_T = 1.
ParamStore init_params(const HetGraph& g, const ModelConfig& cfg, std::uint64_t seed);

/// Nodes of the forward graph on a tape.
struct ForwardVars {
  ad::Var loss;
  ad::Var loss_attribute;
  ad::Var loss_structure;
  ad::Var loss_node_type;
  std::vector<ad::Var> adjacency;
  std::vector<ad::Var> attributes;
  ad::Var node_types;
  std::vector<TypeVars> per_combination;
  TypeVars aggregated;
  ad::Var view_weights;
};

ForwardVars forward(BoundParams& params, const HetGraph& g, const GraphTopology& topo,
                    const ModelConfig& cfg);

struct ForwardResult {
  double loss = 0.0;
  double loss_attribute = 0.0;
  double loss_structure = 0.0;
  double loss_node_type = 0.0;
  Reconstruction reconstruction;
  EmbeddingSet embeddings;
};

ForwardResult extract(const ad::Tape& tape, const ForwardVars& vars);

/// Value-level forward pass; the view partition is the one recorded in g.
ForwardResult forward_loss(const HetGraph& g, const ParamStore& params, const ModelConfig& cfg);

/// Hash of the graph schema (types, views, relations) a model is tied to.
std::uint64_t schema_hash(const HetGraph& g);

}  // namespace ahead
