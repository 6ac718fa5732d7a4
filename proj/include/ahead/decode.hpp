#pragma once

// Structure, attribute and node-type decoders, reconstruction losses and
// per-node anomaly scores.

#include "ahead/autodiff.hpp"
#include "ahead/encoder.hpp"
#include "ahead/hetgraph.hpp"
#include "ahead/params.hpp"

#include <random>
#include <string>
#include <vector>

namespace ahead {

enum class LossKind {
  kFrobenius,  // sqrt(sum e^2 + eps)
  kSquared,    // sum e^2
};

/// Smoothing added under every Frobenius square root.
inline constexpr double kNormEpsilon = 1e-12;

struct DecoderMask {
  bool structure = true;
  bool attribute = true;
  bool node_type = true;
  bool any() const { return structure || attribute || node_type; }
};

/// lambda1 weighs the structure residual, lambda2 the attribute residual and
/// 1 - lambda1 - lambda2 the node-type residual.
struct ScoreWeights {
  double lambda1 = 0.4;
  double lambda2 = 0.4;
  double node_type() const { return 1.0 - lambda1 - lambda2; }
  /// Throws ConfigError unless both lie in [0, 1] and sum to at most 1.
  void validate() const;
};

struct TermWeights {
  double structure = 0.0;
  double attribute = 0.0;
  double node_type = 0.0;
};

/// Zeroes the terms of removed decoders and renormalizes the rest to sum 1.
TermWeights term_weights(const ScoreWeights& w, const DecoderMask& mask = {});

struct Reconstruction {
  /// One dense matrix per declared relation, in declared order.
  std::vector<Matrix> adjacency;
  /// One matrix per node type.
  std::vector<Matrix> attributes;
  /// |V| x |A|, rows in global node order.
  Matrix node_types;
};

namespace paths {
std::string decode_attr_weight(const std::string& type);
std::string decode_attr_bias(const std::string& type);
std::string decode_type_weight(const std::string& type);
std::string decode_type_bias(const std::string& type);
inline constexpr const char* kNodeTypeAttention = "decode.W_T";
}  // namespace paths

/// Glorot weights, zero biases (the attribute bias is n_a x D_a), W_T = 1.
void init_decoder_params(ParamStore& store, const HetGraph& g, const EncoderConfig& enc,
                         std::mt19937_64& rng);

// ---- tape forms -------------------------------------------------------------

/// sigmoid(Z_src Z_dst^T) per declared relation.
std::vector<ad::Var> reconstruct_structure(ad::Tape& tape, const HetGraph& g, const TypeVars& z);
/// relu(Z_a W_a + B_a) per node type.
std::vector<ad::Var> reconstruct_attributes(BoundParams& params, const HetGraph& g,
                                            const TypeVars& z);
/// Row v: softmax(W_T (elementwise) T-Linear_{type(v)}(Z[v])), stacked globally.
ad::Var reconstruct_node_types(BoundParams& params, const HetGraph& g, const TypeVars& z);

ad::Var reconstruction_loss(ad::Tape& tape, ad::Var recon, const Matrix& target, LossKind kind);
ad::Var structure_loss(ad::Tape& tape, const HetGraph& g, const std::vector<ad::Var>& adjacency,
                       LossKind kind);
ad::Var attribute_loss(ad::Tape& tape, const HetGraph& g, const std::vector<ad::Var>& attributes,
                       LossKind kind);
ad::Var node_type_loss(ad::Tape& tape, const Matrix& onehot, ad::Var recon, LossKind kind);

// ---- value forms ------------------------------------------------------------

Matrix node_type_onehot(const HetGraph& g);
std::vector<Matrix> reconstruct_structure_values(const HetGraph& g, const std::vector<Matrix>& z);
std::vector<Matrix> reconstruct_attributes_values(const HetGraph& g, const ParamStore& store,
                                                  const std::vector<Matrix>& z);
Matrix reconstruct_node_types_values(const HetGraph& g, const ParamStore& store,
                                     const std::vector<Matrix>& z);

double structure_loss(const HetGraph& g, const Reconstruction& r, LossKind kind = LossKind::kFrobenius);
double attribute_loss(const HetGraph& g, const Reconstruction& r, LossKind kind = LossKind::kFrobenius);
double node_type_loss(const Matrix& onehot, const Matrix& recon, LossKind kind = LossKind::kFrobenius);
double total_loss(double attribute, double structure, double node_type);

/// Per-node residual norms and weighted score, indexed by global node order.
struct NodeScores {
  Eigen::VectorXd score;
  Eigen::VectorXd r_struct;
  Eigen::VectorXd r_attr;
  Eigen::VectorXd r_type;
};

/// r_struct(v) sums, over declared relations touching v's type, the norm of
/// v's row (as source) and v's column (as target) of A - A~.
NodeScores anomaly_score(const HetGraph& g, const Reconstruction& r, const ScoreWeights& w);
NodeScores anomaly_score(const HetGraph& g, const Reconstruction& r, const TermWeights& w);

/// s / max(s); all zeros when every score is zero.
Eigen::VectorXd anomaly_probability(const Eigen::VectorXd& scores);

}  // namespace ahead
