#pragma once

#include "ahead/hetgraph.hpp"
#include "ahead/model.hpp"
#include "ahead/params.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ahead {

struct TrainConfig {
  double learning_rate = 5e-3;
  double weight_decay = 1e-5;
  std::size_t max_epochs = 100;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  /// Only 64-bit reals are supported.
  int precision_bits = 64;

  void validate() const;
};

std::string to_json(const TrainConfig& cfg);

/// Adam with bias correction; weight decay is added to the gradient as an
/// L2 term. Parameters that receive no gradient are left untouched.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(const TrainConfig& cfg) : cfg_(cfg) {}
  void step(ParamStore& params, const std::map<std::string, Matrix>& grads);
  std::size_t steps() const { return step_; }

 private:
  TrainConfig cfg_;
  std::size_t step_ = 0;
  std::map<std::string, Matrix> m_;
  std::map<std::string, Matrix> v_;
};

struct TrainResult {
  ParamStore params;
  /// Loss of the forward pass at the start of every epoch.
  std::vector<double> loss_trace;
};

/// Full-batch training from init_params(g, model, train.seed).
TrainResult train_model(const HetGraph& g, const ModelConfig& model, const TrainConfig& train);
/// Full-batch training from the given parameters.
TrainResult train_model(const HetGraph& g, const ModelConfig& model, const TrainConfig& train,
                        ParamStore initial);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_path;
  std::size_t samples = 0;
};

/// Compares analytic gradients against central differences (step 1e-6) on
/// `samples` randomly chosen scalars: a tensor is drawn uniformly, then an
/// entry within it. Error is |a - f| / max(1, |a|, |f|).
GradCheckResult grad_check(const HetGraph& g, const ParamStore& params, const ModelConfig& cfg,
                           std::size_t samples, std::uint64_t seed);

struct GradCheckFixture {
  HetGraph graph;
  ModelConfig config;
  ParamStore params;
};

/// Tiny two-type graph (at most 6 nodes per type, a cross-type and a
/// same-type relation, two views per type, every node with incoming edges)
/// and jittered parameters so no relu sits at its kink.
GradCheckFixture make_gradcheck_fixture(std::uint64_t seed);

// ---- model files -------------------------------------------------------------

struct SavedModel {
  ModelConfig config;
  std::uint64_t schema_hash = 0;
  /// Free-form JSON echo of the training configuration.
  std::string train_echo = "{}";
  ParamStore params;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const SavedModel& model, const std::filesystem::path& path);
SavedModel load_model(const std::filesystem::path& path);

/// Throws DataError unless the model was trained on g's schema and carries
/// exactly the parameter paths and shapes the configuration requires.
void check_compatible(const SavedModel& model, const HetGraph& g);

}  // namespace ahead
