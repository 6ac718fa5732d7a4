#include "ahead/model.hpp"

#include "ahead/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <random>

namespace ahead {

using nlohmann::json;

void ModelConfig::validate() const {
  encoder.validate();
  if (!decoders.any()) throw ConfigError("at least one decoder is required");
}

std::string to_json(const ModelConfig& cfg) {
  json j;
  j["hidden_dim"] = cfg.encoder.hidden_dim;
  j["out_dim"] = cfg.encoder.out_dim;
  j["heads"] = cfg.encoder.heads;
  j["depth"] = cfg.encoder.depth;
  j["attn_scale"] = cfg.encoder.attn_scale == AttnScale::kOverall ? "overall" : "per_head";
  j["per_type_out_linear"] = cfg.aggregator.per_type_out_linear;
  j["loss"] = cfg.loss == LossKind::kFrobenius ? "frobenius" : "squared";
  j["decoders"] = {{"structure", cfg.decoders.structure},
                   {"attribute", cfg.decoders.attribute},
                   {"node_type", cfg.decoders.node_type}};
  j["dense_node_budget"] = cfg.dense_node_budget;
  return j.dump();
}

ModelConfig model_config_from_json(const std::string& text) {
  ModelConfig cfg;
  try {
    const json j = json::parse(text);
    cfg.encoder.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    cfg.encoder.out_dim = j.at("out_dim").get<std::size_t>();
    cfg.encoder.heads = j.at("heads").get<std::size_t>();
    cfg.encoder.depth = j.at("depth").get<std::size_t>();
    const auto scale = j.at("attn_scale").get<std::string>();
    if (scale != "overall" && scale != "per_head") throw DataError("unknown attn_scale " + scale);
    cfg.encoder.attn_scale = scale == "overall" ? AttnScale::kOverall : AttnScale::kPerHead;
    cfg.aggregator.per_type_out_linear = j.at("per_type_out_linear").get<bool>();
    const auto loss = j.at("loss").get<std::string>();
    if (loss != "frobenius" && loss != "squared") throw DataError("unknown loss " + loss);
    cfg.loss = loss == "frobenius" ? LossKind::kFrobenius : LossKind::kSquared;
    const auto& d = j.at("decoders");
    cfg.decoders = {d.at("structure").get<bool>(), d.at("attribute").get<bool>(),
                    d.at("node_type").get<bool>()};
    cfg.dense_node_budget = j.at("dense_node_budget").get<std::size_t>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model config: ") + e.what());
  }
  return cfg;
}

ParamStore init_params(const HetGraph& g, const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  require_valid(g);
  std::mt19937_64 rng(seed);
  ParamStore store;
  init_encoder_params(store, g, cfg.encoder, rng);
  init_aggregator_params(store, g, cfg.encoder, cfg.aggregator,
                         enumerate_view_combinations(g).size(), rng);
  init_decoder_params(store, g, cfg.encoder, rng);
  return store;
}

namespace {

void check_finite(const ad::Tape& tape, ad::Var v, const char* term) {
  if (!std::isfinite(tape.value(v)(0, 0))) {
    throw NumericalError(std::string("non-finite ") + term + " loss");
  }
}

}  // namespace

ForwardVars forward(BoundParams& params, const HetGraph& g, const GraphTopology& topo,
                    const ModelConfig& cfg) {
  cfg.validate();
  for (const auto& t : g.node_types) {
    if (t.num_nodes > cfg.dense_node_budget) {
      throw ConfigError("node type " + t.name + " has " + std::to_string(t.num_nodes) +
                        " nodes, above the dense reconstruction budget of " +
                        std::to_string(cfg.dense_node_budget));
    }
  }
  ad::Tape& tape = params.tape();
  const ViewPartition partition = partition_of(g);
  const auto projected = project_views(params, g, partition);
  const auto combos = enumerate_view_combinations(g);

  ForwardVars v;
  std::vector<TypeVars> hidden;
  hidden.reserve(combos.size());
  for (const auto& combo : combos) {
    hidden.push_back(encode_combination(params, g, topo, project_inputs(projected, combo), cfg.encoder));
  }
  v.per_combination = out_project(params, g, hidden, cfg.aggregator);
  v.view_weights = view_weights(params);
  v.aggregated = aggregate(tape, v.per_combination, v.view_weights);

  v.adjacency = reconstruct_structure(tape, g, v.aggregated);
  v.attributes = reconstruct_attributes(params, g, v.aggregated);
  v.node_types = reconstruct_node_types(params, g, v.aggregated);

  v.loss_structure = structure_loss(tape, g, v.adjacency, cfg.loss);
  v.loss_attribute = attribute_loss(tape, g, v.attributes, cfg.loss);
  v.loss_node_type = node_type_loss(tape, node_type_onehot(g), v.node_types, cfg.loss);
  check_finite(tape, v.loss_structure, "structure");
  check_finite(tape, v.loss_attribute, "attribute");
  check_finite(tape, v.loss_node_type, "node-type");

  std::vector<ad::Var> terms;
  if (cfg.decoders.attribute) terms.push_back(v.loss_attribute);
  if (cfg.decoders.structure) terms.push_back(v.loss_structure);
  if (cfg.decoders.node_type) terms.push_back(v.loss_node_type);
  v.loss = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) v.loss = ad::add(tape, v.loss, terms[i]);
  return v;
}

ForwardResult extract(const ad::Tape& tape, const ForwardVars& v) {
  ForwardResult r;
  r.loss = tape.value(v.loss)(0, 0);
  r.loss_attribute = tape.value(v.loss_attribute)(0, 0);
  r.loss_structure = tape.value(v.loss_structure)(0, 0);
  r.loss_node_type = tape.value(v.loss_node_type)(0, 0);
  for (ad::Var a : v.adjacency) r.reconstruction.adjacency.push_back(tape.value(a));
  for (ad::Var a : v.attributes) r.reconstruction.attributes.push_back(tape.value(a));
  r.reconstruction.node_types = tape.value(v.node_types);
  for (const auto& combo : v.per_combination) {
    std::vector<Matrix> z;
    for (ad::Var a : combo) z.push_back(tape.value(a));
    r.embeddings.per_combination.push_back(std::move(z));
  }
  for (ad::Var a : v.aggregated) r.embeddings.aggregated.push_back(tape.value(a));
  r.embeddings.view_weights = tape.value(v.view_weights).row(0);
  return r;
}

ForwardResult forward_loss(const HetGraph& g, const ParamStore& params, const ModelConfig& cfg) {
  ad::Tape tape;
  BoundParams bound(tape, params);
  GraphTopology topo(g);
  return extract(tape, forward(bound, g, topo, cfg));
}

std::uint64_t schema_hash(const HetGraph& g) {
  std::string canon;
  for (const auto& t : g.node_types) {
    canon += "T:" + t.name + ":" + std::to_string(t.num_nodes) + ":" + std::to_string(t.attr_dim);
    for (const auto& view : t.view_columns) {
      canon += "|";
      for (std::size_t c : view) canon += std::to_string(c) + ",";
    }
    canon += ";";
  }
  for (std::size_t r : g.declared_relations()) {
    const auto& rel = g.relations[r];
    canon += "R:" + rel.name + ":" + rel.src_type + ":" + rel.dst_type + ";";
  }
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace ahead
