#include "ahead/experiment.hpp"

#include "ahead/errors.hpp"
#include "ahead/plot.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

namespace ahead {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string to_json(const PipelineConfig& cfg) {
  ordered_json j;
  j["model"] = ordered_json::parse(to_json(cfg.model));
  j["train"] = ordered_json::parse(to_json(cfg.train));
  j["lambda1"] = cfg.weights.lambda1;
  j["lambda2"] = cfg.weights.lambda2;
  return j.dump();
}

namespace {

template <class F>
auto staged(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(stage + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(stage + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(stage + ": " + e.what());
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

template <class T>
T parse_cell(const std::string& s, const fs::path& file, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError(file.string() + ":" + std::to_string(line) + ": malformed value '" + s + "'");
  }
  return v;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace

// ---- score files ---------------------------------------------------------------

std::vector<double> ScoreReport::scores() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.score);
  return out;
}

ScoreReport make_score_report(const HetGraph& g, const NodeScores& s) {
  const GlobalNodeIndex index = global_index(g);
  const auto n = static_cast<Eigen::Index>(index.size());
  if (s.score.size() != n || s.r_struct.size() != n || s.r_attr.size() != n || s.r_type.size() != n) {
    throw DataError("score vectors do not match the graph's node count");
  }
  const Eigen::VectorXd p = anomaly_probability(s.score);
  std::vector<std::size_t> order(index.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return s.score[static_cast<Eigen::Index>(a)] > s.score[static_cast<Eigen::Index>(b)];
  });
  ScoreReport report;
  report.rows.resize(index.size());
  for (std::size_t r = 0; r < order.size(); ++r) report.rows[order[r]].rank = r + 1;
  for (std::size_t v = 0; v < index.size(); ++v) {
    const auto [type, local] = index.to_local(v);
    const auto i = static_cast<Eigen::Index>(v);
    auto& row = report.rows[v];
    row.type = g.node_types[type].name;
    row.local_index = local;
    row.score = s.score[i];
    row.probability = p[i];
    row.r_struct = s.r_struct[i];
    row.r_attr = s.r_attr[i];
    row.r_type = s.r_type[i];
  }
  return report;
}

std::string scores_to_csv(const ScoreReport& report) {
  std::string out = "type,local_index,score,probability,rank,r_struct,r_attr,r_type\n";
  for (const auto& r : report.rows) {
    out += r.type + "," + std::to_string(r.local_index) + "," + format_real(r.score) + "," +
           format_real(r.probability) + "," + std::to_string(r.rank) + "," +
           format_real(r.r_struct) + "," + format_real(r.r_attr) + "," + format_real(r.r_type) + "\n";
  }
  return out;
}

void write_scores_csv(const ScoreReport& report, const fs::path& path) {
  write_file(path, scores_to_csv(report));
}

ScoreReport read_scores_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing file: " + path.string());
  ScoreReport report;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (lineno == 1 && line.rfind("type,", 0) == 0) continue;
    const auto c = split(line, ',');
    if (c.size() != 8) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected 8 columns 'type,local_index,score,probability,rank,r_struct,r_attr,r_type'");
    }
    ScoreRow r;
    r.type = c[0];
    r.local_index = parse_cell<std::size_t>(c[1], path, lineno);
    r.score = parse_cell<double>(c[2], path, lineno);
    r.probability = parse_cell<double>(c[3], path, lineno);
    r.rank = parse_cell<std::size_t>(c[4], path, lineno);
    r.r_struct = parse_cell<double>(c[5], path, lineno);
    r.r_attr = parse_cell<double>(c[6], path, lineno);
    r.r_type = parse_cell<double>(c[7], path, lineno);
    report.rows.push_back(std::move(r));
  }
  return report;
}

LabelTable read_labels_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing file: " + path.string());
  LabelTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (lineno == 1 && line.rfind("type,", 0) == 0) continue;
    const auto c = split(line, ',');
    if (c.size() != 4) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected 'type,local_index,is_anomaly,kind'");
    }
    if (c[2] != "0" && c[2] != "1") {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": is_anomaly must be 0 or 1");
    }
    NodeLabel label{c[2] == "1", anomaly_kind_from_string(c[3])};
    const auto key = std::make_pair(c[0], parse_cell<std::size_t>(c[1], path, lineno));
    if (!table.emplace(key, label).second) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": duplicate label row");
    }
  }
  return table;
}

MetricsReport evaluate_scores(const ScoreReport& report, const LabelTable& labels) {
  std::vector<NodeLabel> joined;
  joined.reserve(report.rows.size());
  for (const auto& r : report.rows) {
    auto it = labels.find({r.type, r.local_index});
    if (it == labels.end()) {
      throw DataError("no label for node " + r.type + "/" + std::to_string(r.local_index));
    }
    joined.push_back(it->second);
  }
  return evaluate(report.scores(), joined);
}

// ---- pipeline ------------------------------------------------------------------

NodeScores score_model(const HetGraph& g, const ParamStore& params, const ModelConfig& model,
                       const ScoreWeights& weights) {
  weights.validate();
  const ForwardResult fr = forward_loss(g, params, model);
  return anomaly_score(g, fr.reconstruction, term_weights(weights, model.decoders));
}

PipelineResult run_pipeline(const HetGraph& g, const PipelineConfig& cfg, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  staged("validate", [&] {
    cfg.model.validate();
    cfg.train.validate();
    cfg.weights.validate();
    require_valid(g);
    if (!g.has_labels()) throw DataError("bundle has no labels");
  });
  PipelineResult out;
  out.training = staged("train", [&] { return train_model(g, cfg.model, cfg.train); });
  out.scores = staged("score", [&] { return score_model(g, out.training.params, cfg.model, cfg.weights); });
  out.report = make_score_report(g, out.scores);
  if (!out_dir.empty()) {
    staged("write", [&] {
      write_scores_csv(out.report, out_dir / "scores.csv");
      std::string loss = "epoch,loss\n";
      for (std::size_t e = 0; e < out.training.loss_trace.size(); ++e) {
        loss += std::to_string(e) + "," + format_real(out.training.loss_trace[e]) + "\n";
      }
      write_file(out_dir / "loss.csv", loss);
    });
  }
  out.metrics = staged("evaluate", [&] { return evaluate(out.report.scores(), flat_labels(g)); });
  out.metrics.seed = cfg.train.seed;
  out.metrics.config = to_json(cfg);
  out.metrics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out_dir.empty()) {
    staged("write", [&] { write_file(out_dir / "metrics.json", to_json(out.metrics)); });
  }
  return out;
}

std::vector<double> random_scores(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out(n);
  for (double& v : out) v = unit(rng);
  return out;
}

// ---- experiments ---------------------------------------------------------------

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kAblation: return "ablation";
    case ExperimentKind::kRobustness: return "robustness";
    case ExperimentKind::kLambdaSweep: return "lambda_sweep";
    case ExperimentKind::kDepthSweep: return "depth_sweep";
    case ExperimentKind::kLrSweep: return "lr_sweep";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "ablation") return ExperimentKind::kAblation;
  if (s == "robustness") return ExperimentKind::kRobustness;
  if (s == "lambda" || s == "lambda_sweep") return ExperimentKind::kLambdaSweep;
  if (s == "depth" || s == "depth_sweep") return ExperimentKind::kDepthSweep;
  if (s == "lr" || s == "lr_sweep") return ExperimentKind::kLrSweep;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

void ExperimentSpec::validate() const {
  if (seeds.empty()) throw ConfigError("experiment needs at least one seed");
  const bool has_grid = kind == ExperimentKind::kLambdaSweep ? !lambda_grid.empty() : !grid.empty();
  if (kind != ExperimentKind::kAblation && !has_grid) {
    throw ConfigError(std::string(to_string(kind)) + " needs a non-empty grid");
  }
}

double GridPoint::mean_auc() const {
  if (runs.empty()) return std::nan("");
  double s = 0;
  for (const auto& r : runs) s += r.metrics.auc;
  return s / static_cast<double>(runs.size());
}

double GridPoint::std_auc() const {
  if (runs.size() < 2) return 0.0;
  const double m = mean_auc();
  double s = 0;
  for (const auto& r : runs) s += (r.metrics.auc - m) * (r.metrics.auc - m);
  return std::sqrt(s / static_cast<double>(runs.size() - 1));
}

const char* to_string(AblationVariant v) {
  switch (v) {
    case AblationVariant::kFull: return "full";
    case AblationVariant::kNoStructure: return "no_structure";
    case AblationVariant::kNoAttribute: return "no_attribute";
    case AblationVariant::kNoNodeType: return "no_node_type";
  }
  return "unknown";
}

DecoderMask decoder_mask(AblationVariant v) {
  DecoderMask m;
  if (v == AblationVariant::kNoStructure) m.structure = false;
  if (v == AblationVariant::kNoAttribute) m.attribute = false;
  if (v == AblationVariant::kNoNodeType) m.node_type = false;
  return m;
}

namespace {

RunRecord record(const PipelineResult& r) {
  RunRecord rec;
  rec.seed = r.metrics.seed;
  rec.metrics = r.metrics;
  rec.initial_loss = r.training.loss_trace.empty() ? 0.0 : r.training.loss_trace.front();
  rec.final_loss = r.training.loss_trace.empty() ? 0.0 : r.training.loss_trace.back();
  return rec;
}

std::string label_of(double x) {
  std::ostringstream o;
  o << x;
  return o.str();
}

}  // namespace

ExperimentResult run_ablation(const HetGraph& g, const ExperimentSpec& spec, const fs::path& out_dir) {
  spec.validate();
  ExperimentResult result;
  result.kind = ExperimentKind::kAblation;
  for (AblationVariant v : {AblationVariant::kFull, AblationVariant::kNoStructure,
                            AblationVariant::kNoAttribute, AblationVariant::kNoNodeType}) {
    GridPoint point;
    point.label = to_string(v);
    point.x = static_cast<double>(result.points.size());
    for (std::uint64_t seed : spec.seeds) {
      PipelineConfig cfg = spec.base;
      cfg.model.decoders = decoder_mask(v);
      cfg.train.seed = seed;
      point.runs.push_back(record(run_pipeline(g, cfg)));
    }
    result.points.push_back(std::move(point));
  }
  if (!out_dir.empty()) write_experiment(result, out_dir);
  return result;
}

namespace {

HetGraph scaled_injection(const HetGraph& clean, const InjectionConfig& base, double multiplier) {
  if (!(multiplier > 0) || std::floor(multiplier) != multiplier) {
    throw ConfigError("anomaly-count multiplier must be a positive integer");
  }
  InjectionConfig cfg = base;
  const auto m = static_cast<std::size_t>(multiplier);
  for (auto& [type, n] : cfg.attr_n) n *= m;
  cfg.struct_c *= m;
  return inject_anomalies(clean, cfg).graph;
}

}  // namespace

ExperimentResult run_sweep(const HetGraph& g, const ExperimentSpec& spec, const fs::path& out_dir) {
  spec.validate();
  ExperimentResult result;
  result.kind = spec.kind;
  switch (spec.kind) {
    case ExperimentKind::kAblation:
      return run_ablation(g, spec, out_dir);

    case ExperimentKind::kLambdaSweep: {
      for (const auto& [l1, l2] : spec.lambda_grid) {
        GridPoint p;
        p.label = label_of(l1) + ":" + label_of(l2);
        p.x = l1;
        try {
          ScoreWeights{l1, l2}.validate();
        } catch (const ConfigError& e) {
          p.skipped = true;
          p.note = e.what();
        }
        result.points.push_back(std::move(p));
      }
      for (std::uint64_t seed : spec.seeds) {
        PipelineConfig cfg = spec.base;
        cfg.train.seed = seed;
        const TrainResult trained = staged("train", [&] { return train_model(g, cfg.model, cfg.train); });
        const ForwardResult fr = staged("score", [&] { return forward_loss(g, trained.params, cfg.model); });
        for (std::size_t i = 0; i < spec.lambda_grid.size(); ++i) {
          GridPoint& p = result.points[i];
          if (p.skipped) continue;
          const auto [l1, l2] = spec.lambda_grid[i];
          const ScoreWeights w{l1, l2};
          const NodeScores s = anomaly_score(g, fr.reconstruction, term_weights(w, cfg.model.decoders));
          RunRecord rec;
          rec.seed = seed;
          rec.metrics = staged("evaluate", [&] { return evaluate(make_score_report(g, s).scores(), flat_labels(g)); });
          cfg.weights = w;
          rec.metrics.seed = seed;
          rec.metrics.config = to_json(cfg);
          rec.initial_loss = trained.loss_trace.front();
          rec.final_loss = trained.loss_trace.back();
          p.runs.push_back(std::move(rec));
        }
      }
      break;
    }

    case ExperimentKind::kDepthSweep:
    case ExperimentKind::kLrSweep:
    case ExperimentKind::kRobustness: {
      for (double x : spec.grid) {
        GridPoint p;
        p.label = label_of(x);
        p.x = x;
        PipelineConfig cfg = spec.base;
        HetGraph target;
        try {
          if (spec.kind == ExperimentKind::kDepthSweep) {
            if (!(x >= 1) || std::floor(x) != x) throw ConfigError("depth must be an integer >= 1");
            cfg.model.encoder.depth = static_cast<std::size_t>(x);
          } else if (spec.kind == ExperimentKind::kLrSweep) {
            if (!(x > 0) || !std::isfinite(x)) throw ConfigError("learning rate must be positive");
            cfg.train.learning_rate = x;
          } else {
            target = scaled_injection(g, spec.injection, x);
          }
        } catch (const ConfigError& e) {
          p.skipped = true;
          p.note = e.what();
          result.points.push_back(std::move(p));
          continue;
        }
        for (std::uint64_t seed : spec.seeds) {
          cfg.train.seed = seed;
          const HetGraph& data = spec.kind == ExperimentKind::kRobustness ? target : g;
          p.runs.push_back(record(run_pipeline(data, cfg)));
        }
        result.points.push_back(std::move(p));
      }
      break;
    }
  }
  if (!out_dir.empty()) write_experiment(result, out_dir);
  return result;
}

void write_experiment(const ExperimentResult& result, const fs::path& out_dir) {
  const std::string name = result.kind == ExperimentKind::kAblation ? "ablation" : to_string(result.kind);
  std::string runs = "point,seed,auc,auc_attr,auc_struct,initial_loss,final_loss,status\n";
  std::string summary = "point,mean_auc,std_auc,runs,status\n";
  const auto kind_auc = [](const MetricsReport& m, const char* k) {
    auto it = m.auc_by_kind.find(k);
    return it == m.auc_by_kind.end() ? std::string() : format_real(it->second);
  };
  for (const auto& p : result.points) {
    if (p.skipped) {
      runs += p.label + ",,,,,,,skipped: " + p.note + "\n";
      summary += p.label + ",,,0,skipped: " + p.note + "\n";
      continue;
    }
    for (const auto& r : p.runs) {
      runs += p.label + "," + std::to_string(r.seed) + "," + format_real(r.metrics.auc) + "," +
              kind_auc(r.metrics, "attr") + "," + kind_auc(r.metrics, "struct") + "," +
              format_real(r.initial_loss) + "," + format_real(r.final_loss) + ",ok\n";
    }
    summary += p.label + "," + format_real(p.mean_auc()) + "," + format_real(p.std_auc()) + "," +
               std::to_string(p.runs.size()) + ",ok\n";
  }
  write_file(out_dir / (name + ".csv"), runs);
  write_file(out_dir / (name + "_summary.csv"), summary);

  std::string error;
  bool ok = true;
  if (result.kind == ExperimentKind::kAblation) {
    BarChart chart{"Decoder ablation", "mean AUC", {}, {}};
    for (const auto& p : result.points) {
      chart.categories.push_back(p.label);
      chart.values.push_back(p.mean_auc());
    }
    ok = write_svg(chart, out_dir / (name + ".svg"), &error);
  } else {
    LineChart chart;
    chart.title = name;
    chart.y_label = "mean AUC";
    chart.x_label = result.kind == ExperimentKind::kLambdaSweep ? "lambda1"
                    : result.kind == ExperimentKind::kDepthSweep ? "depth"
                    : result.kind == ExperimentKind::kLrSweep    ? "learning rate"
                                                                 : "anomaly multiplier";
    chart.log_x = result.kind == ExperimentKind::kLrSweep;
    LineSeries series{"mean AUC", {}};
    for (const auto& p : result.points) {
      if (!p.skipped) series.points.emplace_back(p.x, p.mean_auc());
    }
    chart.series.push_back(std::move(series));
    ok = write_svg(chart, out_dir / (name + ".svg"), &error);
  }
  if (!ok) std::cerr << "warning: chart not written: " << error << "\n";
}

}  // namespace ahead
