#pragma once

#include "ahead/hetgraph.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ahead {

/// Area under the ROC curve: the probability that a random anomaly scores
/// above a random normal node, ties counting one half. Throws DataError
/// unless both classes are present or when sizes differ.
double auc(std::span<const double> scores, std::span<const char> labels);
double auc(const std::vector<double>& scores, const std::vector<bool>& labels);

/// (false positive rate, true positive rate) corners of the ROC curve, from
/// (0, 0) to (1, 1), with tied scores merged into one step.
std::vector<std::pair<double, double>> roc_curve(const std::vector<double>& scores,
                                                 const std::vector<bool>& labels);

struct MetricsReport {
  double auc = 0.0;
  /// Anomalies of one kind against every normal node.
  std::map<std::string, double> auc_by_kind;
  /// Keyed by kind name plus "total".
  std::map<std::string, std::size_t> n_anomalies;
  std::size_t n_nodes = 0;
  std::uint64_t seed = 0;
  /// JSON object echoing the run configuration.
  std::string config = "{}";
  double wall_seconds = 0.0;
};

/// scores and labels are both in global node order.
MetricsReport evaluate(const std::vector<double>& scores, const std::vector<NodeLabel>& labels);

std::string to_json(const MetricsReport& m);

/// Labels of g flattened to global node order.
std::vector<NodeLabel> flat_labels(const HetGraph& g);

}  // namespace ahead
