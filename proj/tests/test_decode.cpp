#include "ahead/decode.hpp"
#include "ahead/errors.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

namespace ahead {
namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

ParamStore decoder_params(const HetGraph& g, std::size_t out_dim, std::uint64_t seed) {
  EncoderConfig enc;
  enc.out_dim = out_dim;
  std::mt19937_64 rng(seed);
  ParamStore store;
  init_decoder_params(store, g, enc, rng);
  return store;
}

// A reconstruction that equals its targets exactly.
Reconstruction perfect(const HetGraph& g) {
  Reconstruction r;
  for (std::size_t rel : g.declared_relations()) r.adjacency.push_back(g.dense_adjacency(rel));
  r.attributes = g.attrs;
  r.node_types = node_type_onehot(g);
  return r;
}

HetGraph one_by_one(bool edge) {
  HetGraph g;
  g.add_node_type("a", Matrix::Zero(1, 1));
  g.add_node_type("b", Matrix::Zero(1, 1));
  const std::size_t r = g.add_relation("r", "a", "b");
  if (edge) g.add_edge(r, 0, 0);
  return g;
}

TEST(StructureDecoder, ZeroEmbeddingsGiveOneHalf) {
  const HetGraph g = testing::small_graph();
  const auto a = reconstruct_structure_values(g, {Matrix::Zero(30, 4), Matrix::Zero(20, 4)});
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0], Matrix::Constant(30, 20, 0.5));
}

TEST(StructureDecoder, AlignedUnitVectorsGiveSigmoidOne) {
  const HetGraph g = one_by_one(true);
  const Matrix e = (Matrix(1, 3) << 0, 1, 0).finished();
  EXPECT_NEAR(reconstruct_structure_values(g, {e, e})[0](0, 0), 0.7310585786300049, 1e-15);
}

TEST(StructureDecoder, StrictlyInsideUnitIntervalForModerateEmbeddings) {
  const HetGraph g = testing::small_graph();
  std::mt19937_64 rng(1);
  const std::vector<Matrix> z = {random_matrix(30, 4, 1.0, rng), random_matrix(20, 4, 1.0, rng)};
  const auto a = reconstruct_structure_values(g, z);
  EXPECT_GT(a[0].minCoeff(), 0.0);
  EXPECT_LT(a[0].maxCoeff(), 1.0);
  EXPECT_LE((a[0] - oracle::structure(g, z)[0]).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(StructureLoss, ExactReconstructionIsAtTheFloor) {
  const HetGraph g = testing::small_graph();
  EXPECT_LE(structure_loss(g, perfect(g)), 1e-6 + 1e-15);
  EXPECT_GE(structure_loss(g, perfect(g)), 0.0);
}

TEST(StructureLoss, OneByOneResidualOfOneHalf) {
  const HetGraph g = one_by_one(true);
  Reconstruction r = perfect(g);
  r.adjacency[0](0, 0) = 0.5;
  EXPECT_NEAR(structure_loss(g, r), 0.5, 1e-12);
  EXPECT_NEAR(structure_loss(g, r, LossKind::kSquared), 0.25, 1e-15);
}

TEST(StructureLoss, SumsOverRelations) {
  HetGraph g = one_by_one(true);
  const std::size_t s = g.add_relation("s", "b", "a");
  g.add_edge(s, 0, 0);
  Reconstruction r = perfect(g);
  r.adjacency[0](0, 0) = 0.5;
  r.adjacency[1](0, 0) = 0.75;
  EXPECT_NEAR(structure_loss(g, r), 0.5 + 0.25, 1e-11);
}

TEST(AttributeDecoder, ZeroInputsGiveZeros) {
  const HetGraph g = testing::small_graph();
  ParamStore store = decoder_params(g, 4, 2);
  const auto x = reconstruct_attributes_values(g, store, {Matrix::Zero(30, 4), Matrix::Zero(20, 4)});
  EXPECT_EQ(x[0], Matrix::Zero(30, 12));
  EXPECT_EQ(x[1], Matrix::Zero(20, 8));
}

TEST(AttributeDecoder, TwoByTwoHandProduct) {
  HetGraph g;
  g.add_node_type("t", Matrix::Zero(2, 2));
  ParamStore store = decoder_params(g, 2, 0);
  store.get_mut(paths::decode_attr_weight("t")) = (Matrix(2, 2) << 1, 2, 3, 4).finished();
  store.get_mut(paths::decode_attr_bias("t")) = (Matrix(2, 2) << 0.5, -20, 0, 1).finished();
  const Matrix z = (Matrix(2, 2) << 1, -1, 2, 0.5).finished();
  // z W = [[1-3, 2-4], [2+1.5, 4+2]] = [[-2, -2], [3.5, 6]]; + B then relu.
  const Matrix want = (Matrix(2, 2) << 0, 0, 3.5, 7).finished();
  EXPECT_EQ(reconstruct_attributes_values(g, store, {z})[0], want);
}

TEST(AttributeLoss, ThreeFourResidualGivesFive) {
  HetGraph g;
  g.add_node_type("t", (Matrix(1, 2) << 3, 4).finished());
  Reconstruction r = perfect(g);
  r.attributes[0].setZero();
  EXPECT_NEAR(attribute_loss(g, r), 5.0, 1e-12);
  EXPECT_LE(attribute_loss(g, perfect(g)), 1e-6 + 1e-15);
}

TEST(AttributeLoss, SumsOverTypes) {
  HetGraph g;
  g.add_node_type("a", (Matrix(1, 2) << 3, 4).finished());
  g.add_node_type("b", (Matrix(1, 1) << 2).finished());
  Reconstruction r = perfect(g);
  r.attributes[0].setZero();
  r.attributes[1].setZero();
  EXPECT_NEAR(attribute_loss(g, r), 7.0, 1e-11);
}

TEST(NodeTypeDecoder, OneHotTargets) {
  const HetGraph g = testing::small_graph();
  const Matrix t = node_type_onehot(g);
  EXPECT_EQ(t.row(0), (RowVector(2) << 1, 0).finished());
  EXPECT_EQ(t.row(30), (RowVector(2) << 0, 1).finished());
  EXPECT_DOUBLE_EQ(t.col(0).sum(), 30.0);
  EXPECT_DOUBLE_EQ(t.col(1).sum(), 20.0);
}

TEST(NodeTypeDecoder, ImdbPresetColumnSums) {
  SynthConfig cfg = preset("imdb-mini");
  HetGraph g;
  for (const auto& t : cfg.node_types) g.add_node_type(t.name, Matrix::Zero(static_cast<Eigen::Index>(t.num_nodes), 1));
  const Matrix t = node_type_onehot(g);
  EXPECT_DOUBLE_EQ(t.col(0).sum(), 428.0);
  EXPECT_DOUBLE_EQ(t.col(1).sum(), 526.0);
}

TEST(NodeTypeDecoder, EqualLogitsGiveUniformRows) {
  const HetGraph g = testing::small_graph();
  ParamStore store = decoder_params(g, 4, 3);
  for (const char* t : {"news", "source"}) store.get_mut(paths::decode_type_weight(t)).setZero();
  const Matrix out = reconstruct_node_types_values(g, store, {Matrix::Ones(30, 4), Matrix::Ones(20, 4)});
  EXPECT_EQ(out, Matrix::Constant(50, 2, 0.5));
}

TEST(NodeTypeDecoder, LogitsOneZeroGiveSigmoidPair) {
  HetGraph g;
  g.add_node_type("a", Matrix::Zero(1, 1));
  g.add_node_type("b", Matrix::Zero(1, 1));
  ParamStore store = decoder_params(g, 1, 0);
  store.get_mut(paths::decode_type_weight("a")) = (Matrix(1, 2) << 1, 0).finished();
  const Matrix out = reconstruct_node_types_values(g, store, {Matrix::Ones(1, 1), Matrix::Zero(1, 1)});
  EXPECT_NEAR(out(0, 0), 0.7310585786300049, 1e-15);
  EXPECT_NEAR(out(0, 1), 0.2689414213699951, 1e-15);
}

TEST(NodeTypeDecoder, AttentionWeighsLogitsElementwise) {
  HetGraph g;
  g.add_node_type("a", Matrix::Zero(1, 1));
  g.add_node_type("b", Matrix::Zero(1, 1));
  ParamStore store = decoder_params(g, 1, 0);
  store.get_mut(paths::decode_type_weight("a")) = (Matrix(1, 2) << 1, 1).finished();
  store.get_mut(paths::kNodeTypeAttention) = (Matrix(1, 2) << 2, 0).finished();
  const Matrix out = reconstruct_node_types_values(g, store, {Matrix::Ones(1, 1), Matrix::Zero(1, 1)});
  // softmax((2 * 1, 0 * 1)) = (sigmoid(2), 1 - sigmoid(2))
  EXPECT_NEAR(out(0, 0), oracle::sigmoid(2.0), 1e-15);
}

TEST(NodeTypeDecoder, RowsSumToOne) {
  const HetGraph g = testing::small_graph();
  const ParamStore store = decoder_params(g, 4, 4);
  std::mt19937_64 rng(5);
  const Matrix out = reconstruct_node_types_values(g, store, {random_matrix(30, 4, 3.0, rng), random_matrix(20, 4, 3.0, rng)});
  EXPECT_GE(out.minCoeff(), 0.0);
  for (Eigen::Index i = 0; i < out.rows(); ++i) EXPECT_NEAR(out.row(i).sum(), 1.0, 1e-9);
}

TEST(NodeTypeLoss, HalfHalfAgainstOneHot) {
  const Matrix t = (Matrix(1, 2) << 1, 0).finished();
  const Matrix r = (Matrix(1, 2) << 0.5, 0.5).finished();
  EXPECT_NEAR(node_type_loss(t, r), std::sqrt(0.5), 1e-12);
  EXPECT_LE(node_type_loss(t, t), 1e-6 + 1e-15);
}

TEST(NodeTypeLoss, InvariantToRowPermutation) {
  std::mt19937_64 rng(6);
  const Matrix t = random_matrix(5, 3, 1.0, rng);
  const Matrix r = random_matrix(5, 3, 1.0, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> p(5);
  p.indices() << 3, 0, 4, 1, 2;
  EXPECT_NEAR(node_type_loss(t, r), node_type_loss(p * t, p * r), 1e-14);
}

TEST(TotalLoss, PlainSum) {
  EXPECT_EQ(total_loss(0, 0, 0), 0.0);
  EXPECT_EQ(total_loss(1, 2, 3), 6.0);
  EXPECT_EQ(total_loss(3, 1, 2), total_loss(1, 2, 3));
}

TEST(TermWeights, RenormalizeWithoutRemovedDecoders) {
  const ScoreWeights w;
  const TermWeights full = term_weights(w);
  EXPECT_DOUBLE_EQ(full.structure, 0.4);
  EXPECT_DOUBLE_EQ(full.attribute, 0.4);
  EXPECT_NEAR(full.node_type, 0.2, 1e-15);
  const TermWeights no_struct = term_weights(w, {false, true, true});
  EXPECT_DOUBLE_EQ(no_struct.structure, 0.0);
  EXPECT_NEAR(no_struct.attribute, 0.4 / 0.6, 1e-15);
  EXPECT_NEAR(no_struct.node_type, 0.2 / 0.6, 1e-15);
  EXPECT_THROW(term_weights(w, {false, false, false}), ConfigError);
  EXPECT_THROW(term_weights({0.6, 0.6}), ConfigError);
  EXPECT_THROW(term_weights({-0.1, 0.5}), ConfigError);
}

TEST(AnomalyScore, PerfectReconstructionScoresZero) {
  const HetGraph g = testing::small_graph();
  const NodeScores s = anomaly_score(g, perfect(g), ScoreWeights{});
  EXPECT_EQ(s.score, Eigen::VectorXd::Zero(50));
}

TEST(AnomalyScore, StructureOnlyWeights) {
  const HetGraph g = testing::small_graph();
  std::mt19937_64 rng(7);
  Reconstruction r = perfect(g);
  r.adjacency[0] = reconstruct_structure_values(g, {random_matrix(30, 4, 1, rng), random_matrix(20, 4, 1, rng)})[0];
  r.attributes[0] += random_matrix(30, 12, 1, rng);
  const NodeScores s = anomaly_score(g, r, ScoreWeights{1.0, 0.0});
  EXPECT_EQ(s.score, s.r_struct);
}

TEST(AnomalyScore, MatchesPerTermOracle) {
  const HetGraph g = testing::small_graph();
  std::mt19937_64 rng(8);
  Reconstruction r;
  r.adjacency = reconstruct_structure_values(g, {random_matrix(30, 4, 1, rng), random_matrix(20, 4, 1, rng)});
  r.attributes = {random_matrix(30, 12, 1, rng), random_matrix(20, 8, 1, rng)};
  r.node_types = reconstruct_node_types_values(g, decoder_params(g, 4, 1),
                                               {random_matrix(30, 4, 1, rng), random_matrix(20, 4, 1, rng)});
  for (auto [l1, l2] : {std::pair{0.4, 0.4}, std::pair{0.1, 0.7}, std::pair{1.0, 0.0}}) {
    const NodeScores s = anomaly_score(g, r, ScoreWeights{l1, l2});
    const auto want = oracle::scores(g, r, l1, l2);
    for (Eigen::Index v = 0; v < s.score.size(); ++v) {
      EXPECT_NEAR(s.score(v), want[static_cast<std::size_t>(v)], 1e-12);
    }
  }
}

TEST(AnomalyScore, MonotoneInEachResidual) {
  const HetGraph g = testing::small_graph();
  Reconstruction r = perfect(g);
  const NodeScores base = anomaly_score(g, r, ScoreWeights{});
  r.attributes[0](3, 1) += 2.0;
  const NodeScores more = anomaly_score(g, r, ScoreWeights{});
  EXPECT_GT(more.score(3), base.score(3));
  for (Eigen::Index v = 0; v < base.score.size(); ++v) EXPECT_GE(more.score(v), base.score(v));
}

TEST(AnomalyProbability, ScalesByMaximum) {
  const Eigen::VectorXd p = anomaly_probability((Eigen::VectorXd(2) << 2, 4).finished());
  EXPECT_DOUBLE_EQ(p(0), 0.5);
  EXPECT_DOUBLE_EQ(p(1), 1.0);
  EXPECT_EQ(anomaly_probability(Eigen::VectorXd::Zero(3)), Eigen::VectorXd::Zero(3));
}

TEST(AnomalyProbability, ScaleInvariantAndRankPreserving) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  Eigen::VectorXd s(40);
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = u(rng);
  const Eigen::VectorXd p = anomaly_probability(s);
  EXPECT_DOUBLE_EQ(p.maxCoeff(), 1.0);
  EXPECT_TRUE(anomaly_probability(s * 7.5).isApprox(p, 1e-15));
  std::vector<int> a(40);
  std::vector<int> b(40);
  std::iota(a.begin(), a.end(), 0);
  std::iota(b.begin(), b.end(), 0);
  std::stable_sort(a.begin(), a.end(), [&](int i, int j) { return s(i) > s(j); });
  std::stable_sort(b.begin(), b.end(), [&](int i, int j) { return p(i) > p(j); });
  EXPECT_EQ(a, b);
}

}  // namespace
}  // namespace ahead
