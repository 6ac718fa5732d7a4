#pragma once

// End-to-end runs: train, score, evaluate, plus the ablation, robustness and
// hyperparameter sweeps built on top of them.

#include "ahead/decode.hpp"
#include "ahead/hetgraph.hpp"
#include "ahead/inject.hpp"
#include "ahead/metrics.hpp"
#include "ahead/model.hpp"
#include "ahead/train.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ahead {

struct PipelineConfig {
  ModelConfig model;
  TrainConfig train;
  ScoreWeights weights;
};

std::string to_json(const PipelineConfig& cfg);

// ---- score files ---------------------------------------------------------------

struct ScoreRow {
  std::string type;
  std::size_t local_index = 0;
  double score = 0.0;
  double probability = 0.0;
  /// 1 for the highest score; ties go to the lower global index.
  std::size_t rank = 0;
  double r_struct = 0.0;
  double r_attr = 0.0;
  double r_type = 0.0;
};

/// Rows in global node order.
struct ScoreReport {
  std::vector<ScoreRow> rows;
  std::vector<double> scores() const;
};

ScoreReport make_score_report(const HetGraph& g, const NodeScores& s);
std::string scores_to_csv(const ScoreReport& report);
void write_scores_csv(const ScoreReport& report, const std::filesystem::path& path);
ScoreReport read_scores_csv(const std::filesystem::path& path);

using LabelTable = std::map<std::pair<std::string, std::size_t>, NodeLabel>;
LabelTable read_labels_csv(const std::filesystem::path& path);

/// Joins scores with labels on (type, local_index); every scored node needs
/// a label.
MetricsReport evaluate_scores(const ScoreReport& report, const LabelTable& labels);

// ---- pipeline ------------------------------------------------------------------

/// Scores every node of g with a trained model; removed decoders drop out of
/// the score and the remaining weights are renormalized.
NodeScores score_model(const HetGraph& g, const ParamStore& params, const ModelConfig& model,
                       const ScoreWeights& weights);

struct PipelineResult {
  TrainResult training;
  NodeScores scores;
  ScoreReport report;
  MetricsReport metrics;
};

/// Train, score and evaluate g (which must carry labels). With a non-empty
/// out_dir, writes scores.csv, loss.csv and metrics.json there; scores.csv
/// is written before evaluation so it survives a single-class failure.
/// Errors are rethrown with the failing stage prefixed.
PipelineResult run_pipeline(const HetGraph& g, const PipelineConfig& cfg,
                            const std::filesystem::path& out_dir = {});

/// Seeded uniform [0, 1) scores for the random-ranking control.
std::vector<double> random_scores(std::size_t n, std::uint64_t seed);

// ---- experiments ---------------------------------------------------------------

enum class ExperimentKind { kAblation, kRobustness, kLambdaSweep, kDepthSweep, kLrSweep };

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kAblation;
  /// Depths, learning rates or anomaly-count multipliers.
  std::vector<double> grid;
  /// (lambda1, lambda2) pairs for the lambda sweep.
  std::vector<std::pair<double, double>> lambda_grid;
  std::vector<std::uint64_t> seeds;
  PipelineConfig base;
  /// Robustness only: injection at multiplier 1. Attribute counts and the
  /// clique count are multiplied per grid point.
  InjectionConfig injection;

  /// Throws ConfigError on an empty grid or seed list.
  void validate() const;
};

struct RunRecord {
  std::uint64_t seed = 0;
  MetricsReport metrics;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

struct GridPoint {
  std::string label;
  double x = 0.0;
  bool skipped = false;
  std::string note;
  std::vector<RunRecord> runs;
  double mean_auc() const;
  double std_auc() const;
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::kAblation;
  std::vector<GridPoint> points;
};

enum class AblationVariant { kFull, kNoStructure, kNoAttribute, kNoNodeType };
const char* to_string(AblationVariant v);
DecoderMask decoder_mask(AblationVariant v);

/// Trains the four decoder variants on every seed. out_dir receives
/// ablation.csv (one row per run), ablation_summary.csv and ablation.svg.
ExperimentResult run_ablation(const HetGraph& g, const ExperimentSpec& spec,
                              const std::filesystem::path& out_dir = {});

/// One pipeline run per grid point and seed; infeasible points become
/// skipped rows. The lambda sweep trains once per seed and rescores.
/// out_dir receives <kind>.csv, <kind>_summary.csv and <kind>.svg.
ExperimentResult run_sweep(const HetGraph& g, const ExperimentSpec& spec,
                           const std::filesystem::path& out_dir = {});

/// Writes the per-run and summary CSVs plus a chart. Chart failures are
/// reported on stderr and otherwise ignored.
void write_experiment(const ExperimentResult& result, const std::filesystem::path& out_dir);

}  // namespace ahead
