#include "ahead/aggregate.hpp"

#include "ahead/errors.hpp"

namespace ahead {

namespace paths {

std::string aggregate_out_weight(const std::string& type, bool per_type) {
  return per_type ? "aggregate.out." + type + ".weight" : "aggregate.out.weight";
}

std::string aggregate_out_bias(const std::string& type, bool per_type) {
  return per_type ? "aggregate.out." + type + ".bias" : "aggregate.out.bias";
}

}  // namespace paths

void init_aggregator_params(ParamStore& store, const HetGraph& g, const EncoderConfig& enc,
                            const AggregatorConfig& cfg, std::size_t num_combinations,
                            std::mt19937_64& rng) {
  const auto h1 = static_cast<Eigen::Index>(enc.hidden_dim);
  const auto h2 = static_cast<Eigen::Index>(enc.out_dim);
  if (cfg.per_type_out_linear) {
    for (const auto& t : g.node_types) {
      store.add(paths::aggregate_out_weight(t.name, true), glorot_uniform(h1, h2, rng));
      store.add(paths::aggregate_out_bias(t.name, true), Matrix::Zero(1, h2));
    }
  } else {
    store.add(paths::aggregate_out_weight("", false), glorot_uniform(h1, h2, rng));
    store.add(paths::aggregate_out_bias("", false), Matrix::Zero(1, h2));
  }
  store.add(paths::kAlpha, Matrix::Zero(1, static_cast<Eigen::Index>(num_combinations)));
}

std::vector<TypeVars> out_project(BoundParams& params, const HetGraph& g,
                                  const std::vector<TypeVars>& hidden, const AggregatorConfig& cfg) {
  ad::Tape& tape = params.tape();
  std::vector<TypeVars> out;
  for (const TypeVars& combo : hidden) {
    if (combo.size() != g.node_types.size()) throw DataError("out_project: node type count mismatch");
    TypeVars z;
    for (std::size_t a = 0; a < combo.size(); ++a) {
      const std::string& name = g.node_types[a].name;
      ad::Var w = params(paths::aggregate_out_weight(name, cfg.per_type_out_linear));
      if (tape.value(w).rows() != tape.value(combo[a]).cols()) {
        throw DataError("out_project: hidden dim does not match the output projection");
      }
      z.push_back(ad::add_row(tape, ad::matmul(tape, combo[a], w),
                              params(paths::aggregate_out_bias(name, cfg.per_type_out_linear))));
    }
    out.push_back(std::move(z));
  }
  return out;
}

ad::Var view_weights(BoundParams& params) {
  return ad::softmax_rows(params.tape(), params(paths::kAlpha));
}

TypeVars aggregate(ad::Tape& tape, const std::vector<TypeVars>& embeddings, ad::Var weights) {
  const Matrix& w = tape.value(weights);
  if (embeddings.empty() || w.rows() != 1 ||
      w.cols() != static_cast<Eigen::Index>(embeddings.size())) {
    throw DataError("aggregate: " + std::to_string(embeddings.size()) +
                    " embeddings for " + std::to_string(w.cols()) + " view weights");
  }
  TypeVars out;
  for (std::size_t a = 0; a < embeddings[0].size(); ++a) {
    ad::Var acc = ad::scale_by_entry(tape, embeddings[0][a], weights, 0, 0);
    for (std::size_t k = 1; k < embeddings.size(); ++k) {
      acc = ad::add(tape, acc,
                    ad::scale_by_entry(tape, embeddings[k][a], weights, 0,
                                       static_cast<Eigen::Index>(k)));
    }
    out.push_back(acc);
  }
  return out;
}

RowVector view_weights_values(const RowVector& alpha) {
  RowVector e = (alpha.array() - alpha.maxCoeff()).exp().matrix();
  return e / e.sum();
}

std::vector<Matrix> aggregate_values(const std::vector<std::vector<Matrix>>& embeddings,
                                     const RowVector& weights) {
  if (embeddings.empty() || static_cast<Eigen::Index>(embeddings.size()) != weights.size()) {
    throw DataError("aggregate: embedding/weight count mismatch");
  }
  std::vector<Matrix> out;
  for (std::size_t a = 0; a < embeddings[0].size(); ++a) {
    Matrix acc = weights(0) * embeddings[0][a];
    for (std::size_t k = 1; k < embeddings.size(); ++k) {
      acc += weights(static_cast<Eigen::Index>(k)) * embeddings[k][a];
    }
    out.push_back(std::move(acc));
  }
  return out;
}

}  // namespace ahead
