#include "ahead/encoder.hpp"

#include "ahead/errors.hpp"

#include <cmath>
#include <optional>

namespace ahead {

double EncoderConfig::score_divisor() const {
  const double d = attn_scale == AttnScale::kOverall ? static_cast<double>(hidden_dim)
                                                     : static_cast<double>(head_dim());
  return std::sqrt(d);
}

void EncoderConfig::validate() const {
  if (hidden_dim == 0 || out_dim == 0) throw ConfigError("hidden and out dims must be positive");
  if (heads == 0 || hidden_dim % heads != 0) {
    throw ConfigError("attention heads (" + std::to_string(heads) +
                      ") must divide the hidden dim (" + std::to_string(hidden_dim) + ")");
  }
  if (depth < 1) throw ConfigError("encoder depth must be at least 1");
}

std::vector<ViewCombination> enumerate_view_combinations(const HetGraph& g) {
  std::vector<ViewCombination> out;
  const std::size_t types = g.node_types.size();
  std::vector<std::size_t> current(types, 0);
  for (const auto& t : g.node_types) {
    if (t.num_views() == 0) throw DataError("node type " + t.name + " declares no views");
  }
  while (true) {
    out.push_back(ViewCombination{current, out.size() + 1});
    // Odometer increment, last type fastest.
    std::size_t pos = types;
    while (pos > 0) {
      --pos;
      if (++current[pos] < g.node_types[pos].num_views()) break;
      current[pos] = 0;
      if (pos == 0) return out;
    }
    if (types == 0) return out;
  }
}

GraphTopology::GraphTopology(const HetGraph& g) : num_types(g.node_types.size()) {
  incoming.resize(num_types);
  for (const auto& t : g.node_types) num_nodes.push_back(static_cast<Eigen::Index>(t.num_nodes));
  for (std::size_t r = 0; r < g.relations.size(); ++r) {
    Relation rel;
    rel.src_type = g.src_type_index(r);
    rel.dst_type = g.dst_type_index(r);
    rel.src.reserve(g.edges[r].size());
    rel.dst.reserve(g.edges[r].size());
    for (const Edge& e : g.edges[r]) {
      rel.src.push_back(static_cast<Eigen::Index>(e.src));
      rel.dst.push_back(static_cast<Eigen::Index>(e.dst));
    }
    incoming[rel.dst_type].push_back(r);
    relations.push_back(std::move(rel));
  }
}

namespace paths {

std::string input_weight(const std::string& type, std::size_t view) {
  return "encoder.input." + type + ".view" + std::to_string(view) + ".weight";
}
std::string input_bias(const std::string& type, std::size_t view) {
  return "encoder.input." + type + ".view" + std::to_string(view) + ".bias";
}
std::string head_weight(std::size_t layer, const std::string& type, std::size_t head,
                        const std::string& kind) {
  return "encoder.layer" + std::to_string(layer) + "." + type + ".head" + std::to_string(head) +
         "." + kind + ".weight";
}
std::string head_bias(std::size_t layer, const std::string& type, std::size_t head,
                      const std::string& kind) {
  return "encoder.layer" + std::to_string(layer) + "." + type + ".head" + std::to_string(head) +
         "." + kind + ".bias";
}
std::string w_att(std::size_t layer, const std::string& relation, std::size_t head) {
  return "encoder.layer" + std::to_string(layer) + ".rel:" + relation + ".head" +
         std::to_string(head) + ".W_att";
}
std::string w_mes(std::size_t layer, const std::string& relation, std::size_t head) {
  return "encoder.layer" + std::to_string(layer) + ".rel:" + relation + ".head" +
         std::to_string(head) + ".W_mes";
}
std::string out_weight(std::size_t layer, const std::string& type) {
  return "encoder.layer" + std::to_string(layer) + "." + type + ".out.weight";
}
std::string out_bias(std::size_t layer, const std::string& type) {
  return "encoder.layer" + std::to_string(layer) + "." + type + ".out.bias";
}

}  // namespace paths

void init_encoder_params(ParamStore& store, const HetGraph& g, const EncoderConfig& cfg,
                         std::mt19937_64& rng) {
  cfg.validate();
  const auto h1 = static_cast<Eigen::Index>(cfg.hidden_dim);
  const auto dh = static_cast<Eigen::Index>(cfg.head_dim());
  for (const auto& t : g.node_types) {
    for (std::size_t i = 0; i < t.num_views(); ++i) {
      const auto d = static_cast<Eigen::Index>(t.view_columns[i].size());
      store.add(paths::input_weight(t.name, i), glorot_uniform(d, h1, rng));
      store.add(paths::input_bias(t.name, i), Matrix::Zero(1, h1));
    }
  }
  for (std::size_t l = 0; l < cfg.depth; ++l) {
    for (const auto& t : g.node_types) {
      for (std::size_t h = 0; h < cfg.heads; ++h) {
        for (const char* kind : {"key", "query", "message"}) {
          store.add(paths::head_weight(l, t.name, h, kind), glorot_uniform(h1, dh, rng));
          store.add(paths::head_bias(l, t.name, h, kind), Matrix::Zero(1, dh));
        }
      }
      store.add(paths::out_weight(l, t.name), glorot_uniform(h1, h1, rng));
      store.add(paths::out_bias(l, t.name), Matrix::Zero(1, h1));
    }
    for (const auto& r : g.relations) {
      for (std::size_t h = 0; h < cfg.heads; ++h) {
        store.add(paths::w_att(l, r.name, h), glorot_uniform(dh, dh, rng));
        store.add(paths::w_mes(l, r.name, h), glorot_uniform(dh, dh, rng));
      }
    }
  }
  const auto types = static_cast<Eigen::Index>(g.node_types.size());
  const auto rels = static_cast<Eigen::Index>(g.relations.size());
  store.add(paths::kMu, Matrix::Ones(types, rels * types));
}

std::vector<TypeVars> project_views(BoundParams& params, const HetGraph& g,
                                    const ViewPartition& partition) {
  ad::Tape& tape = params.tape();
  std::vector<TypeVars> out(g.node_types.size());
  for (std::size_t a = 0; a < g.node_types.size(); ++a) {
    const auto& t = g.node_types[a];
    if (partition.columns.at(a).size() != t.num_views()) {
      throw DataError("partition view count disagrees with node type " + t.name);
    }
    for (std::size_t i = 0; i < t.num_views(); ++i) {
      ad::Var x = tape.constant(view_slice(g, partition, a, i));
      ad::Var w = params(paths::input_weight(t.name, i));
      if (tape.value(w).rows() != tape.value(x).cols()) {
        throw DataError("input projection shape mismatch for " + t.name + " view " +
                        std::to_string(i));
      }
      out[a].push_back(ad::add_row(tape, ad::matmul(tape, x, w),
                                   params(paths::input_bias(t.name, i))));
    }
  }
  return out;
}

TypeVars project_inputs(const std::vector<TypeVars>& projected, const ViewCombination& combo) {
  if (combo.assignment.size() != projected.size()) {
    throw DataError("view combination does not cover every node type");
  }
  TypeVars out;
  for (std::size_t a = 0; a < projected.size(); ++a) {
    if (combo.assignment[a] >= projected[a].size()) {
      throw DataError("view combination references a missing view");
    }
    out.push_back(projected[a][combo.assignment[a]]);
  }
  return out;
}

namespace {

// Per-layer per-head key/query/message projections, created on first use.
class HeadProjections {
 public:
  HeadProjections(BoundParams& params, const HetGraph& g, const TypeVars& hidden,
                  std::size_t layer, std::size_t heads)
      : params_(params), g_(g), hidden_(hidden), layer_(layer),
        cache_(g.node_types.size() * heads * 3), heads_(heads) {}

  ad::Var get(std::size_t type, std::size_t head, int kind) {
    static const char* kNames[] = {"key", "query", "message"};
    auto& slot = cache_[(type * heads_ + head) * 3 + static_cast<std::size_t>(kind)];
    if (!slot) {
      ad::Tape& tape = params_.tape();
      const std::string& name = g_.node_types[type].name;
      slot = ad::add_row(
          tape, ad::matmul(tape, hidden_[type], params_(paths::head_weight(layer_, name, head, kNames[kind]))),
          params_(paths::head_bias(layer_, name, head, kNames[kind])));
    }
    return *slot;
  }

 private:
  BoundParams& params_;
  const HetGraph& g_;
  const TypeVars& hidden_;
  std::size_t layer_;
  std::vector<std::optional<ad::Var>> cache_;
  std::size_t heads_;
};

constexpr int kKey = 0;
constexpr int kQuery = 1;
constexpr int kMessage = 2;

EdgeAttention attention_with(HeadProjections& proj, BoundParams& params, const HetGraph& g,
                             const GraphTopology& topo, std::size_t layer,
                             const EncoderConfig& cfg) {
  ad::Tape& tape = params.tape();
  EdgeAttention att;
  att.weights.resize(topo.num_types);
  att.offsets.resize(topo.num_types);
  const auto num_types = static_cast<Eigen::Index>(topo.num_types);
  const double inv_scale = 1.0 / cfg.score_divisor();
  ad::Var mu = params(paths::kMu);
  for (std::size_t t = 0; t < topo.num_types; ++t) {
    IndexList segment;
    Eigen::Index offset = 0;
    for (std::size_t r : topo.incoming[t]) {
      att.offsets[t].push_back(offset);
      offset += static_cast<Eigen::Index>(topo.relations[r].dst.size());
      segment.insert(segment.end(), topo.relations[r].dst.begin(), topo.relations[r].dst.end());
    }
    if (offset == 0) continue;
    for (std::size_t h = 0; h < cfg.heads; ++h) {
      std::vector<ad::Var> parts;
      for (std::size_t r : topo.incoming[t]) {
        const auto& rel = topo.relations[r];
        if (rel.src.empty()) continue;
        ad::Var keyed = ad::matmul(tape, proj.get(rel.src_type, h, kKey),
                                   params(paths::w_att(layer, g.relations[r].name, h)));
        ad::Var raw = ad::gather_rowdot(tape, keyed, proj.get(t, h, kQuery), rel.src, rel.dst);
        raw = ad::scale_by_entry(tape, raw, mu, static_cast<Eigen::Index>(rel.src_type),
                                 static_cast<Eigen::Index>(r) * num_types +
                                     static_cast<Eigen::Index>(t));
        parts.push_back(ad::scale(tape, raw, inv_scale));
      }
      ad::Var scores = parts.size() == 1 ? parts[0] : ad::concat_rows(tape, parts);
      att.weights[t].push_back(ad::segment_softmax(tape, scores, segment, topo.num_nodes[t]));
    }
  }
  return att;
}

}  // namespace

EdgeAttention edge_attention(BoundParams& params, const HetGraph& g, const GraphTopology& topo,
                             const TypeVars& hidden, std::size_t layer, const EncoderConfig& cfg) {
  HeadProjections proj(params, g, hidden, layer, cfg.heads);
  return attention_with(proj, params, g, topo, layer, cfg);
}

TypeVars layer_forward(BoundParams& params, const HetGraph& g, const GraphTopology& topo,
                       const TypeVars& hidden, std::size_t layer, const EncoderConfig& cfg) {
  ad::Tape& tape = params.tape();
  HeadProjections proj(params, g, hidden, layer, cfg.heads);
  EdgeAttention att = attention_with(proj, params, g, topo, layer, cfg);
  const auto dh = static_cast<Eigen::Index>(cfg.head_dim());
  TypeVars out;
  for (std::size_t t = 0; t < topo.num_types; ++t) {
    const std::string& name = g.node_types[t].name;
    std::vector<ad::Var> heads;
    for (std::size_t h = 0; h < cfg.heads; ++h) {
      std::optional<ad::Var> acc;
      for (std::size_t k = 0; k < topo.incoming[t].size(); ++k) {
        const std::size_t r = topo.incoming[t][k];
        const auto& rel = topo.relations[r];
        if (rel.src.empty()) continue;
        ad::Var message = ad::matmul(tape, proj.get(rel.src_type, h, kMessage),
                                     params(paths::w_mes(layer, g.relations[r].name, h)));
        ad::Var weight = ad::slice_rows(tape, att.weights[t][h], att.offsets[t][k],
                                        static_cast<Eigen::Index>(rel.src.size()));
        ad::Var contrib =
            ad::scatter_weighted(tape, weight, message, rel.src, rel.dst, topo.num_nodes[t]);
        acc = acc ? ad::add(tape, *acc, contrib) : contrib;
      }
      heads.push_back(acc ? *acc : tape.constant(Matrix::Zero(topo.num_nodes[t], dh)));
    }
    ad::Var agg = heads.size() == 1 ? heads[0] : ad::concat_cols(tape, heads);
    ad::Var updated = ad::relu(
        tape, ad::add_row(tape, ad::matmul(tape, agg, params(paths::out_weight(layer, name))),
                          params(paths::out_bias(layer, name))));
    ad::Var next = ad::add(tape, updated, hidden[t]);
    if (!tape.value(next).allFinite()) {
      throw NumericalError("non-finite hidden state at layer " + std::to_string(layer) +
                           " for node type " + name);
    }
    out.push_back(next);
  }
  return out;
}

TypeVars encode_combination(BoundParams& params, const HetGraph& g, const GraphTopology& topo,
                            const TypeVars& inputs, const EncoderConfig& cfg) {
  cfg.validate();
  TypeVars hidden = inputs;
  for (std::size_t l = 0; l < cfg.depth; ++l) hidden = layer_forward(params, g, topo, hidden, l, cfg);
  return hidden;
}

std::vector<std::vector<Eigen::VectorXd>> edge_attention_values(const HetGraph& g,
                                                                const ParamStore& store,
                                                                const std::vector<Matrix>& hidden,
                                                                std::size_t layer,
                                                                const EncoderConfig& cfg) {
  ad::Tape tape;
  BoundParams params(tape, store);
  TypeVars h;
  for (const Matrix& m : hidden) h.push_back(tape.constant(m));
  GraphTopology topo(g);
  EdgeAttention att = edge_attention(params, g, topo, h, layer, cfg);
  std::vector<std::vector<Eigen::VectorXd>> out(g.relations.size(),
                                                std::vector<Eigen::VectorXd>(cfg.heads));
  for (std::size_t t = 0; t < topo.num_types; ++t) {
    for (std::size_t k = 0; k < topo.incoming[t].size(); ++k) {
      const std::size_t r = topo.incoming[t][k];
      const auto n = static_cast<Eigen::Index>(topo.relations[r].src.size());
      for (std::size_t hd = 0; hd < cfg.heads; ++hd) {
        if (n == 0) {
          out[r][hd] = Eigen::VectorXd();
        } else {
          out[r][hd] = tape.value(att.weights[t][hd]).col(0).segment(att.offsets[t][k], n);
        }
      }
    }
  }
  return out;
}

std::vector<Matrix> layer_forward_values(const HetGraph& g, const ParamStore& store,
                                         const std::vector<Matrix>& hidden, std::size_t layer,
                                         const EncoderConfig& cfg) {
  ad::Tape tape;
  BoundParams params(tape, store);
  TypeVars h;
  for (const Matrix& m : hidden) h.push_back(tape.constant(m));
  GraphTopology topo(g);
  TypeVars out = layer_forward(params, g, topo, h, layer, cfg);
  std::vector<Matrix> values;
  for (ad::Var v : out) values.push_back(tape.value(v));
  return values;
}

std::vector<Matrix> encode_combination_values(const HetGraph& g, const ViewPartition& partition,
                                              const ViewCombination& combo,
                                              const ParamStore& store, const EncoderConfig& cfg) {
  ad::Tape tape;
  BoundParams params(tape, store);
  GraphTopology topo(g);
  TypeVars inputs = project_inputs(project_views(params, g, partition), combo);
  TypeVars out = encode_combination(params, g, topo, inputs, cfg);
  std::vector<Matrix> values;
  for (ad::Var v : out) values.push_back(tape.value(v));
  return values;
}

}  // namespace ahead
