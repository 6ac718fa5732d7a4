#include "ahead/decode.hpp"

#include "ahead/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ahead {

void ScoreWeights::validate() const {
  const double tol = 1e-12;
  if (!(lambda1 >= 0.0 && lambda1 <= 1.0 && lambda2 >= 0.0 && lambda2 <= 1.0) ||
      lambda1 + lambda2 > 1.0 + tol) {
    throw ConfigError("score weights must satisfy 0 <= lambda1, lambda2 and lambda1 + lambda2 <= 1 (got " +
                      std::to_string(lambda1) + ", " + std::to_string(lambda2) + ")");
  }
}

TermWeights term_weights(const ScoreWeights& w, const DecoderMask& mask) {
  w.validate();
  if (!mask.any()) throw ConfigError("at least one decoder is required");
  TermWeights t{mask.structure ? w.lambda1 : 0.0, mask.attribute ? w.lambda2 : 0.0,
                mask.node_type ? std::max(0.0, w.node_type()) : 0.0};
  const double total = t.structure + t.attribute + t.node_type;
  const bool all_on = mask.structure && mask.attribute && mask.node_type;
  if (all_on || total <= 0.0) return t;
  return TermWeights{t.structure / total, t.attribute / total, t.node_type / total};
}

namespace paths {

std::string decode_attr_weight(const std::string& type) { return "decode.attr." + type + ".weight"; }
std::string decode_attr_bias(const std::string& type) { return "decode.attr." + type + ".bias"; }
std::string decode_type_weight(const std::string& type) { return "decode.type." + type + ".weight"; }
std::string decode_type_bias(const std::string& type) { return "decode.type." + type + ".bias"; }

}  // namespace paths

void init_decoder_params(ParamStore& store, const HetGraph& g, const EncoderConfig& enc,
                         std::mt19937_64& rng) {
  const auto h2 = static_cast<Eigen::Index>(enc.out_dim);
  const auto types = static_cast<Eigen::Index>(g.node_types.size());
  for (const auto& t : g.node_types) {
    const auto n = static_cast<Eigen::Index>(t.num_nodes);
    const auto d = static_cast<Eigen::Index>(t.attr_dim);
    store.add(paths::decode_attr_weight(t.name), glorot_uniform(h2, d, rng));
    store.add(paths::decode_attr_bias(t.name), Matrix::Zero(n, d));
    store.add(paths::decode_type_weight(t.name), glorot_uniform(h2, types, rng));
    store.add(paths::decode_type_bias(t.name), Matrix::Zero(1, types));
  }
  store.add(paths::kNodeTypeAttention, Matrix::Ones(1, types));
}

std::vector<ad::Var> reconstruct_structure(ad::Tape& tape, const HetGraph& g, const TypeVars& z) {
  std::vector<ad::Var> out;
  for (std::size_t r : g.declared_relations()) {
    out.push_back(ad::sigmoid(tape, ad::matmul_nt(tape, z[g.src_type_index(r)],
                                                  z[g.dst_type_index(r)])));
  }
  return out;
}

std::vector<ad::Var> reconstruct_attributes(BoundParams& params, const HetGraph& g,
                                            const TypeVars& z) {
  ad::Tape& tape = params.tape();
  std::vector<ad::Var> out;
  for (std::size_t a = 0; a < g.node_types.size(); ++a) {
    const std::string& name = g.node_types[a].name;
    ad::Var w = params(paths::decode_attr_weight(name));
    ad::Var b = params(paths::decode_attr_bias(name));
    if (tape.value(w).rows() != tape.value(z[a]).cols() ||
        tape.value(b).rows() != tape.value(z[a]).rows()) {
      throw DataError("attribute decoder shape mismatch for node type " + name);
    }
    out.push_back(ad::relu(tape, ad::add(tape, ad::matmul(tape, z[a], w), b)));
  }
  return out;
}

ad::Var reconstruct_node_types(BoundParams& params, const HetGraph& g, const TypeVars& z) {
  ad::Tape& tape = params.tape();
  ad::Var attention = params(paths::kNodeTypeAttention);
  std::vector<ad::Var> rows;
  for (std::size_t a = 0; a < g.node_types.size(); ++a) {
    const std::string& name = g.node_types[a].name;
    ad::Var logits = ad::add_row(tape, ad::matmul(tape, z[a], params(paths::decode_type_weight(name))),
                                 params(paths::decode_type_bias(name)));
    rows.push_back(ad::mul_row(tape, logits, attention));
  }
  ad::Var stacked = rows.size() == 1 ? rows[0] : ad::concat_rows(tape, rows);
  return ad::softmax_rows(tape, stacked);
}

ad::Var reconstruction_loss(ad::Tape& tape, ad::Var recon, const Matrix& target, LossKind kind) {
  ad::Var sq = ad::squared_distance(tape, recon, target);
  return kind == LossKind::kSquared ? sq : ad::sqrt_eps(tape, sq, kNormEpsilon);
}

ad::Var structure_loss(ad::Tape& tape, const HetGraph& g, const std::vector<ad::Var>& adjacency,
                       LossKind kind) {
  const auto declared = g.declared_relations();
  if (declared.size() != adjacency.size()) throw DataError("structure_loss: relation count mismatch");
  if (declared.empty()) return tape.constant(Matrix::Zero(1, 1));
  ad::Var total = reconstruction_loss(tape, adjacency[0], g.dense_adjacency(declared[0]), kind);
  for (std::size_t i = 1; i < declared.size(); ++i) {
    total = ad::add(tape, total,
                    reconstruction_loss(tape, adjacency[i], g.dense_adjacency(declared[i]), kind));
  }
  return total;
}

ad::Var attribute_loss(ad::Tape& tape, const HetGraph& g, const std::vector<ad::Var>& attributes,
                       LossKind kind) {
  if (attributes.size() != g.attrs.size()) throw DataError("attribute_loss: type count mismatch");
  ad::Var total = reconstruction_loss(tape, attributes[0], g.attrs[0], kind);
  for (std::size_t a = 1; a < attributes.size(); ++a) {
    total = ad::add(tape, total, reconstruction_loss(tape, attributes[a], g.attrs[a], kind));
  }
  return total;
}

ad::Var node_type_loss(ad::Tape& tape, const Matrix& onehot, ad::Var recon, LossKind kind) {
  return reconstruction_loss(tape, recon, onehot, kind);
}

Matrix node_type_onehot(const HetGraph& g) {
  Matrix t = Matrix::Zero(static_cast<Eigen::Index>(g.total_nodes()),
                          static_cast<Eigen::Index>(g.node_types.size()));
  Eigen::Index row = 0;
  for (std::size_t a = 0; a < g.node_types.size(); ++a) {
    for (std::size_t i = 0; i < g.node_types[a].num_nodes; ++i) {
      t(row++, static_cast<Eigen::Index>(a)) = 1.0;
    }
  }
  return t;
}

namespace {

TypeVars constants(ad::Tape& tape, const std::vector<Matrix>& z) {
  TypeVars out;
  for (const Matrix& m : z) out.push_back(tape.constant(m));
  return out;
}

double norm_loss(const Matrix& diff, LossKind kind) {
  const double sq = diff.squaredNorm();
  return kind == LossKind::kSquared ? sq : std::sqrt(sq + kNormEpsilon);
}

}  // namespace

std::vector<Matrix> reconstruct_structure_values(const HetGraph& g, const std::vector<Matrix>& z) {
  ad::Tape tape;
  std::vector<Matrix> out;
  for (ad::Var v : reconstruct_structure(tape, g, constants(tape, z))) out.push_back(tape.value(v));
  return out;
}

std::vector<Matrix> reconstruct_attributes_values(const HetGraph& g, const ParamStore& store,
                                                  const std::vector<Matrix>& z) {
  ad::Tape tape;
  BoundParams params(tape, store);
  std::vector<Matrix> out;
  for (ad::Var v : reconstruct_attributes(params, g, constants(tape, z))) {
    out.push_back(tape.value(v));
  }
  return out;
}

Matrix reconstruct_node_types_values(const HetGraph& g, const ParamStore& store,
                                     const std::vector<Matrix>& z) {
  ad::Tape tape;
  BoundParams params(tape, store);
  return tape.value(reconstruct_node_types(params, g, constants(tape, z)));
}

double structure_loss(const HetGraph& g, const Reconstruction& r, LossKind kind) {
  const auto declared = g.declared_relations();
  if (declared.size() != r.adjacency.size()) throw DataError("structure_loss: relation count mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < declared.size(); ++i) {
    total += norm_loss(g.dense_adjacency(declared[i]) - r.adjacency[i], kind);
  }
  return total;
}

double attribute_loss(const HetGraph& g, const Reconstruction& r, LossKind kind) {
  if (r.attributes.size() != g.attrs.size()) throw DataError("attribute_loss: type count mismatch");
  double total = 0.0;
  for (std::size_t a = 0; a < g.attrs.size(); ++a) total += norm_loss(g.attrs[a] - r.attributes[a], kind);
  return total;
}

double node_type_loss(const Matrix& onehot, const Matrix& recon, LossKind kind) {
  if (onehot.rows() != recon.rows() || onehot.cols() != recon.cols()) {
    throw DataError("node_type_loss: shape mismatch");
  }
  return norm_loss(onehot - recon, kind);
}

double total_loss(double attribute, double structure, double node_type) {
  return attribute + structure + node_type;
}

NodeScores anomaly_score(const HetGraph& g, const Reconstruction& r, const ScoreWeights& w) {
  return anomaly_score(g, r, term_weights(w));
}

NodeScores anomaly_score(const HetGraph& g, const Reconstruction& r, const TermWeights& w) {
  const GlobalNodeIndex index(g);
  const auto n = static_cast<Eigen::Index>(index.size());
  NodeScores s;
  s.r_struct = Eigen::VectorXd::Zero(n);
  s.r_attr = Eigen::VectorXd::Zero(n);
  s.r_type = Eigen::VectorXd::Zero(n);

  const auto declared = g.declared_relations();
  if (declared.size() != r.adjacency.size()) throw DataError("anomaly_score: relation count mismatch");
  for (std::size_t i = 0; i < declared.size(); ++i) {
    const Matrix residual = g.dense_adjacency(declared[i]) - r.adjacency[i];
    const auto src_off = static_cast<Eigen::Index>(index.offset(g.src_type_index(declared[i])));
    const auto dst_off = static_cast<Eigen::Index>(index.offset(g.dst_type_index(declared[i])));
    s.r_struct.segment(src_off, residual.rows()) += residual.rowwise().norm();
    s.r_struct.segment(dst_off, residual.cols()) += residual.colwise().norm().transpose();
  }
  if (r.attributes.size() != g.attrs.size()) throw DataError("anomaly_score: type count mismatch");
  for (std::size_t a = 0; a < g.attrs.size(); ++a) {
    const auto off = static_cast<Eigen::Index>(index.offset(a));
    s.r_attr.segment(off, g.attrs[a].rows()) = (g.attrs[a] - r.attributes[a]).rowwise().norm();
  }
  const Matrix onehot = node_type_onehot(g);
  if (r.node_types.rows() != onehot.rows() || r.node_types.cols() != onehot.cols()) {
    throw DataError("anomaly_score: node-type reconstruction shape mismatch");
  }
  s.r_type = (onehot - r.node_types).rowwise().norm();
  s.score = w.structure * s.r_struct + w.attribute * s.r_attr + w.node_type * s.r_type;
  return s;
}

Eigen::VectorXd anomaly_probability(const Eigen::VectorXd& scores) {
  if (scores.size() == 0) return scores;
  const double mx = scores.maxCoeff();
  if (mx <= 0.0) return Eigen::VectorXd::Zero(scores.size());
  return scores / mx;
}

}  // namespace ahead
