#pragma once

// Multi-view heterogeneous graph transformer encoder.
//
// Each view of each node type has its own input projection into the hidden
// space. The encoder runs once per view combination (one view per node
// type); within a run every layer computes per-head edge attention over all
// incoming edges of a target, aggregates per-relation messages and applies a
// relu'd type-specific output projection plus a residual connection.

#include "ahead/autodiff.hpp"
#include "ahead/hetgraph.hpp"
#include "ahead/params.hpp"
#include "ahead/preprocess.hpp"

#include <cstddef>
#include <random>
#include <string>
#include <vector>

namespace ahead {

enum class AttnScale {
  kOverall,  // divide raw scores by sqrt(hidden_dim)
  kPerHead,  // divide by sqrt(hidden_dim / heads)
};

struct EncoderConfig {
  std::size_t hidden_dim = 64;
  std::size_t out_dim = 16;
  std::size_t heads = 2;
  std::size_t depth = 2;
  AttnScale attn_scale = AttnScale::kOverall;

  std::size_t head_dim() const { return hidden_dim / heads; }
  double score_divisor() const;
  /// Throws ConfigError on an unusable configuration.
  void validate() const;
};

struct ViewCombination {
  /// assignment[a] is the view used for node type a.
  std::vector<std::size_t> assignment;
  /// 1-based position in the enumeration.
  std::size_t ordinal = 1;
};

/// Cartesian product of per-type views, lexicographic with the first node
/// type varying slowest.
std::vector<ViewCombination> enumerate_view_combinations(const HetGraph& g);

/// Edge index arrays per relation, prepared once per graph.
struct GraphTopology {
  struct Relation {
    std::size_t src_type = 0;
    std::size_t dst_type = 0;
    IndexList src;
    IndexList dst;
  };
  std::vector<Relation> relations;
  /// incoming[t]: relations (forward and reverse) whose target type is t.
  std::vector<std::vector<std::size_t>> incoming;
  std::vector<Eigen::Index> num_nodes;
  std::size_t num_types = 0;

  explicit GraphTopology(const HetGraph& g);
};

namespace paths {
std::string input_weight(const std::string& type, std::size_t view);
std::string input_bias(const std::string& type, std::size_t view);
/// kind is one of "key", "query", "message".
std::string head_weight(std::size_t layer, const std::string& type, std::size_t head,
                        const std::string& kind);
std::string head_bias(std::size_t layer, const std::string& type, std::size_t head,
                      const std::string& kind);
std::string w_att(std::size_t layer, const std::string& relation, std::size_t head);
std::string w_mes(std::size_t layer, const std::string& relation, std::size_t head);
std::string out_weight(std::size_t layer, const std::string& type);
std::string out_bias(std::size_t layer, const std::string& type);
inline constexpr const char* kMu = "encoder.mu";
}  // namespace paths

/// Adds every encoder parameter to `store`: Glorot weights, zero biases and
/// an all-ones mu of shape |A| x (|R| * |A|), where entry
/// (src_type, relation * |A| + dst_type) scales that meta relation.
void init_encoder_params(ParamStore& store, const HetGraph& g, const EncoderConfig& cfg,
                         std::mt19937_64& rng);

using TypeVars = std::vector<ad::Var>;

/// Projections of every (type, view) slice; result[a][i].
std::vector<TypeVars> project_views(BoundParams& params, const HetGraph& g,
                                    const ViewPartition& partition);

/// Picks the projected view assigned to each type by `combo`.
TypeVars project_inputs(const std::vector<TypeVars>& projected, const ViewCombination& combo);

struct EdgeAttention {
  /// weights[t][h]: column over the incoming edges of type t, laid out
  /// relation by relation following topology.incoming[t].
  std::vector<std::vector<ad::Var>> weights;
  /// offsets[t][k]: first row of relation incoming[t][k] within weights[t][h].
  std::vector<std::vector<Eigen::Index>> offsets;
};

EdgeAttention edge_attention(BoundParams& params, const HetGraph& g, const GraphTopology& topo,
                             const TypeVars& hidden, std::size_t layer, const EncoderConfig& cfg);

TypeVars layer_forward(BoundParams& params, const HetGraph& g, const GraphTopology& topo,
                       const TypeVars& hidden, std::size_t layer, const EncoderConfig& cfg);

/// `depth` layers on top of the projected inputs.
TypeVars encode_combination(BoundParams& params, const HetGraph& g, const GraphTopology& topo,
                            const TypeVars& inputs, const EncoderConfig& cfg);

// Value-level conveniences (no gradient tracking).

/// attention[r][h] holds the normalized weight of every edge of relation r.
std::vector<std::vector<Eigen::VectorXd>> edge_attention_values(const HetGraph& g,
                                                                const ParamStore& store,
                                                                const std::vector<Matrix>& hidden,
                                                                std::size_t layer,
                                                                const EncoderConfig& cfg);
std::vector<Matrix> layer_forward_values(const HetGraph& g, const ParamStore& store,
                                         const std::vector<Matrix>& hidden, std::size_t layer,
                                         const EncoderConfig& cfg);
std::vector<Matrix> encode_combination_values(const HetGraph& g, const ViewPartition& partition,
                                              const ViewCombination& combo,
                                              const ParamStore& store, const EncoderConfig& cfg);

}  // namespace ahead
