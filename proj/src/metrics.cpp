#include "ahead/metrics.hpp"

#include "ahead/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ahead {

namespace {

std::vector<std::size_t> order_by_score(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return idx;
}

}  // namespace

// Mann-Whitney U with average ranks over tied groups.
double auc(std::span<const double> scores, std::span<const char> labels) {
  if (scores.size() != labels.size()) {
    throw DataError("auc: " + std::to_string(scores.size()) + " scores but " +
                    std::to_string(labels.size()) + " labels");
  }
  for (double s : scores) {
    if (std::isnan(s)) throw DataError("auc: NaN score");
  }
  const auto idx = order_by_score(scores);
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]]) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw DataError("auc: labels contain a single class (" + std::to_string(positives) +
                    " anomalies, " + std::to_string(negatives) + " normal nodes)");
  }
  const double p = static_cast<double>(positives);
  const double n = static_cast<double>(negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
  std::vector<char> l(labels.begin(), labels.end());
  return auc(std::span<const double>(scores), std::span<const char>(l));
}

std::vector<std::pair<double, double>> roc_curve(const std::vector<double>& scores,
                                                 const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw DataError("roc_curve: size mismatch");
  auto idx = order_by_score(scores);
  std::reverse(idx.begin(), idx.end());
  const auto p = static_cast<double>(std::count(labels.begin(), labels.end(), true));
  const auto n = static_cast<double>(labels.size()) - p;
  if (p == 0 || n == 0) throw DataError("roc_curve: labels contain a single class");
  std::vector<std::pair<double, double>> out{{0.0, 0.0}};
  double tp = 0;
  double fp = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] ? tp : fp) += 1.0;
      ++j;
    }
    out.emplace_back(fp / n, tp / p);
    i = j;
  }
  return out;
}

MetricsReport evaluate(const std::vector<double>& scores, const std::vector<NodeLabel>& labels) {
  if (scores.size() != labels.size()) {
    throw DataError("evaluate: " + std::to_string(scores.size()) + " scores but " +
                    std::to_string(labels.size()) + " labels");
  }
  MetricsReport m;
  m.n_nodes = scores.size();
  std::vector<bool> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i].is_anomaly;
  m.auc = auc(scores, y);

  for (AnomalyKind kind : {AnomalyKind::kAttribute, AnomalyKind::kStructural}) {
    std::vector<double> s;
    std::vector<bool> yk;
    std::size_t count = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const bool is_kind = labels[i].is_anomaly && labels[i].kind == kind;
      if (is_kind || !labels[i].is_anomaly) {
        s.push_back(scores[i]);
        yk.push_back(is_kind);
        count += is_kind;
      }
    }
    m.n_anomalies[to_string(kind)] = count;
    if (count > 0) m.auc_by_kind[to_string(kind)] = auc(s, yk);
  }
  // Anomalies with kind "none" still count toward the total.
  m.n_anomalies["total"] = static_cast<std::size_t>(std::count(y.begin(), y.end(), true));
  return m;
}

std::string to_json(const MetricsReport& m) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["auc"] = m.auc;
  j["auc_by_kind"] = ordered_json::object();
  for (const auto& [k, v] : m.auc_by_kind) j["auc_by_kind"][k] = v;
  j["n_anomalies"] = ordered_json::object();
  for (const auto& [k, v] : m.n_anomalies) j["n_anomalies"][k] = v;
  j["n_nodes"] = m.n_nodes;
  j["seed"] = m.seed;
  j["config"] = ordered_json::parse(m.config);
  j["wall_seconds"] = m.wall_seconds;
  return j.dump(2) + "\n";
}

std::vector<NodeLabel> flat_labels(const HetGraph& g) {
  if (!g.has_labels()) throw DataError("graph has no labels");
  std::vector<NodeLabel> out;
  out.reserve(g.total_nodes());
  for (const auto& per_type : g.labels) out.insert(out.end(), per_type.begin(), per_type.end());
  return out;
}

}  // namespace ahead
