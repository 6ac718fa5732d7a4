#pragma once

// View-level attention: every combination's final hidden state is projected
// to the output dim, then the K projections are mixed with softmax(alpha).

#include "ahead/autodiff.hpp"
#include "ahead/encoder.hpp"
#include "ahead/hetgraph.hpp"
#include "ahead/params.hpp"

#include <random>
#include <vector>

namespace ahead {

struct AggregatorConfig {
  /// One output projection per node type instead of a single shared one.
  bool per_type_out_linear = false;
};

struct EmbeddingSet {
  /// per_combination[k][a]: n_a x out_dim.
  std::vector<std::vector<Matrix>> per_combination;
  /// aggregated[a]: n_a x out_dim.
  std::vector<Matrix> aggregated;
  RowVector view_weights;
};

namespace paths {
std::string aggregate_out_weight(const std::string& type, bool per_type);
std::string aggregate_out_bias(const std::string& type, bool per_type);
inline constexpr const char* kAlpha = "aggregate.alpha";
}  // namespace paths

/// Glorot output projection(s), zero bias, alpha = 0 (uniform view weights).
void init_aggregator_params(ParamStore& store, const HetGraph& g, const EncoderConfig& enc,
                            const AggregatorConfig& cfg, std::size_t num_combinations,
                            std::mt19937_64& rng);

/// Z^(k)[a] = Out-Linear(hidden[k][a]).
std::vector<TypeVars> out_project(BoundParams& params, const HetGraph& g,
                                  const std::vector<TypeVars>& hidden, const AggregatorConfig& cfg);

/// softmax(alpha) as a 1 x K row.
ad::Var view_weights(BoundParams& params);

/// Z[a] = sum_k weights(0, k) * embeddings[k][a].
TypeVars aggregate(ad::Tape& tape, const std::vector<TypeVars>& embeddings, ad::Var weights);

// Value-level forms.
RowVector view_weights_values(const RowVector& alpha);
std::vector<Matrix> aggregate_values(const std::vector<std::vector<Matrix>>& embeddings,
                                     const RowVector& weights);

}  // namespace ahead
