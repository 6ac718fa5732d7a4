// Command-line entry point. Exit codes: 0 success, 1 usage or configuration
// error, 2 data error, 3 numerical failure.

#include "ahead/errors.hpp"
#include "ahead/experiment.hpp"
#include "ahead/inject.hpp"
#include "ahead/plot.hpp"
#include "ahead/preprocess.hpp"
#include "ahead/synth.hpp"
#include "ahead/train.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace ahead;
namespace fs = std::filesystem;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& s, const std::string& what) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("malformed " + what + " '" + s + "'");
  }
  return v;
}

/// "news=3,source=2"
std::map<std::string, std::size_t> parse_type_counts(const std::string& s, const std::string& what) {
  std::map<std::string, std::size_t> out;
  for (const auto& item : split(s, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(what + " expects TYPE=N, got '" + item + "'");
    out[item.substr(0, eq)] = parse_number<std::size_t>(item.substr(eq + 1), what);
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_number<std::uint64_t>(item, "seed"));
  if (out.empty()) throw ConfigError("--seeds is empty");
  return out;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("missing file: " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw DataError("cannot write file: " + p.string());
  out << text;
}

struct ModelFlags {
  std::size_t epochs = 100;
  double lr = 5e-3;
  double weight_decay = 1e-5;
  std::size_t hidden = 64;
  std::size_t outdim = 16;
  std::size_t heads = 2;
  std::size_t depth = 2;
  std::uint64_t seed = 0;
  std::string loss = "frobenius";
  std::string attn_scale = "overall";
  bool per_type_out_linear = false;
  double lambda1 = 0.4;
  double lambda2 = 0.4;

  void add(CLI::App* app, bool with_seed = true) {
    app->add_option("--epochs", epochs, "training epochs");
    app->add_option("--lr", lr, "Adam learning rate");
    app->add_option("--weight-decay", weight_decay, "L2 weight decay");
    app->add_option("--hidden", hidden, "hidden dimension");
    app->add_option("--outdim", outdim, "embedding dimension");
    app->add_option("--heads", heads, "attention heads");
    app->add_option("--depth", depth, "encoder layers");
    if (with_seed) app->add_option("--seed", seed, "initialization seed");
    app->add_option("--loss", loss, "frobenius|squared")->check(CLI::IsMember({"frobenius", "squared"}));
    app->add_option("--attn-scale", attn_scale, "overall|per_head")
        ->check(CLI::IsMember({"overall", "per_head"}));
    app->add_flag("--per-type-out-linear", per_type_out_linear, "one output projection per node type");
  }

  PipelineConfig config() const {
    PipelineConfig c;
    c.model.encoder.hidden_dim = hidden;
    c.model.encoder.out_dim = outdim;
    c.model.encoder.heads = heads;
    c.model.encoder.depth = depth;
    c.model.encoder.attn_scale = attn_scale == "overall" ? AttnScale::kOverall : AttnScale::kPerHead;
    c.model.aggregator.per_type_out_linear = per_type_out_linear;
    c.model.loss = loss == "frobenius" ? LossKind::kFrobenius : LossKind::kSquared;
    c.train.max_epochs = epochs;
    c.train.learning_rate = lr;
    c.train.weight_decay = weight_decay;
    c.train.seed = seed;
    c.weights = {lambda1, lambda2};
    return c;
  }
};

struct InjectFlags {
  std::string attr_n;
  std::size_t attr_k = 50;
  std::size_t struct_m = 15;
  std::size_t struct_c = 0;
  std::string struct_relation;
  std::uint64_t seed = 0;

  void add(CLI::App* app, bool with_seed = true) {
    app->add_option("--attr-n", attr_n, "attribute anomalies per type, TYPE=N[,...]");
    app->add_option("--attr-k", attr_k, "candidate pool size");
    app->add_option("--struct-m", struct_m, "clique size");
    app->add_option("--struct-c", struct_c, "clique count");
    app->add_option("--struct-relation", struct_relation, "relation carrying clique edges");
    if (with_seed) app->add_option("--seed", seed, "injection seed");
  }

  InjectionConfig config() const {
    InjectionConfig c;
    if (!attr_n.empty()) c.attr_n = parse_type_counts(attr_n, "--attr-n");
    c.attr_k = attr_k;
    c.struct_m = struct_m;
    c.struct_c = struct_c;
    c.struct_relation = struct_relation;
    c.seed = seed;
    return c;
  }
};

void print_experiment(const ExperimentResult& r) {
  for (const auto& p : r.points) {
    if (p.skipped) {
      std::printf("%-14s skipped (%s)\n", p.label.c_str(), p.note.c_str());
    } else {
      std::printf("%-14s mean AUC %.4f  std %.4f  runs %zu\n", p.label.c_str(), p.mean_auc(),
                  p.std_auc(), p.runs.size());
    }
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Heterogeneous graph anomaly detection"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic graph bundle");
  std::string gen_preset;
  std::string gen_config;
  std::string gen_out;
  std::uint64_t gen_seed = 0;
  auto* preset_opt = gen->add_option("--preset", gen_preset, "preset name");
  auto* config_opt = gen->add_option("--config", gen_config, "JSON generator config");
  preset_opt->excludes(config_opt);
  gen->add_option("--out", gen_out, "output bundle directory")->required();
  gen->add_option("--seed", gen_seed, "generator seed");

  // split-views
  auto* sv = app.add_subcommand("split-views", "randomly partition attribute columns into views");
  std::string sv_in;
  std::string sv_out;
  std::string sv_views;
  std::uint64_t sv_seed = 0;
  bool sv_standardize = false;
  sv->add_option("--in", sv_in, "bundle directory")->required();
  sv->add_option("--out", sv_out, "output directory (default: rewrite --in)");
  sv->add_option("--views", sv_views, "TYPE=K[,TYPE=K...]")->required();
  sv->add_option("--seed", sv_seed, "shuffle seed");
  sv->add_flag("--standardize", sv_standardize, "z-score every attribute column first");

  // inject
  auto* inj = app.add_subcommand("inject", "inject attribute and structural anomalies");
  std::string inj_in;
  std::string inj_out;
  std::string inj_report;
  InjectFlags inj_flags;
  inj->add_option("--in", inj_in, "input bundle")->required();
  inj->add_option("--out", inj_out, "output bundle")->required();
  inj->add_option("--report", inj_report, "injection report JSON (default OUT/injection_report.json)");
  inj_flags.add(inj);

  // train
  auto* tr = app.add_subcommand("train", "train a model on a bundle");
  std::string tr_data;
  std::string tr_out;
  ModelFlags tr_flags;
  tr->add_option("--data", tr_data, "bundle directory")->required();
  tr->add_option("--out", tr_out, "model file")->required();
  tr_flags.add(tr);

  // score
  auto* sc = app.add_subcommand("score", "score every node with a trained model");
  std::string sc_data;
  std::string sc_model;
  std::string sc_out;
  double sc_l1 = 0.4;
  double sc_l2 = 0.4;
  sc->add_option("--data", sc_data, "bundle directory")->required();
  sc->add_option("--model", sc_model, "model file")->required();
  sc->add_option("--out", sc_out, "scores CSV")->required();
  sc->add_option("--lambda1", sc_l1, "structure weight");
  sc->add_option("--lambda2", sc_l2, "attribute weight");

  // eval
  auto* ev = app.add_subcommand("eval", "compute AUC of a score file");
  std::string ev_scores;
  std::string ev_labels;
  std::string ev_out;
  std::string ev_plot;
  ev->add_option("--scores", ev_scores, "scores CSV")->required();
  ev->add_option("--labels", ev_labels, "labels CSV")->required();
  ev->add_option("--out", ev_out, "metrics JSON")->required();
  ev->add_option("--plot", ev_plot, "ROC curve SVG");

  // ablate
  auto* ab = app.add_subcommand("ablate", "decoder ablation over seeds");
  std::string ab_data;
  std::string ab_out;
  std::string ab_seeds = "0,1,2,3,4";
  ModelFlags ab_flags;
  ab->add_option("--data", ab_data, "bundle directory")->required();
  ab->add_option("--out", ab_out, "output directory")->required();
  ab->add_option("--seeds", ab_seeds, "comma-separated training seeds");
  ab->add_option("--lambda1", ab_flags.lambda1, "structure weight");
  ab->add_option("--lambda2", ab_flags.lambda2, "attribute weight");
  ab_flags.add(ab, false);

  // sweep
  auto* sw = app.add_subcommand("sweep", "hyperparameter or robustness sweep");
  std::string sw_data;
  std::string sw_out;
  std::string sw_kind;
  std::string sw_grid;
  std::string sw_seeds = "0,1,2,3,4";
  ModelFlags sw_flags;
  InjectFlags sw_inject;
  std::uint64_t sw_inject_seed = 0;
  sw->add_option("--data", sw_data, "bundle directory (clean bundle for robustness)")->required();
  sw->add_option("--out", sw_out, "output directory")->required();
  sw->add_option("--kind", sw_kind, "lambda|depth|lr|robustness")
      ->required()
      ->check(CLI::IsMember({"lambda", "depth", "lr", "robustness"}));
  sw->add_option("--grid", sw_grid,
                 "comma-separated values; lambda points as L1:L2, robustness as count multipliers")
      ->required();
  sw->add_option("--seeds", sw_seeds, "comma-separated training seeds");
  sw->add_option("--lambda1", sw_flags.lambda1, "structure weight");
  sw->add_option("--lambda2", sw_flags.lambda2, "attribute weight");
  sw->add_option("--inject-seed", sw_inject_seed, "robustness injection seed");
  sw_flags.add(sw, false);
  sw_inject.add(sw, false);

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient check on a tiny fixture");
  std::uint64_t gc_seed = 0;
  std::size_t gc_samples = 200;
  double gc_tol = 1e-4;
  gc->add_option("--seed", gc_seed, "fixture and sampling seed");
  gc->add_option("--samples", gc_samples, "sampled scalars");
  gc->add_option("--tolerance", gc_tol, "maximum accepted relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*gen) {
    if (gen_preset.empty() == gen_config.empty()) throw ConfigError("give exactly one of --preset or --config");
    SynthConfig cfg = gen_preset.empty() ? synth_config_from_json(read_text(gen_config)) : preset(gen_preset);
    cfg.seed = gen_seed;
    const HetGraph g = generate(cfg);
    save_bundle(g, gen_out);
    std::printf("wrote %s: %zu nodes\n", gen_out.c_str(), g.total_nodes());
  } else if (*sv) {
    HetGraph g = load_bundle(sv_in);
    if (sv_standardize) g = standardize(g);
    const auto views = parse_type_counts(sv_views, "--views");
    g = apply_partition(g, split_views(g, views, sv_seed));
    save_bundle(g, sv_out.empty() ? sv_in : sv_out);
  } else if (*inj) {
    const HetGraph g = load_bundle(inj_in);
    const InjectionResult r = inject_anomalies(g, inj_flags.config());
    save_bundle(r.graph, inj_out);
    const fs::path report = inj_report.empty() ? fs::path(inj_out) / "injection_report.json" : fs::path(inj_report);
    write_text(report, report_to_json(r.graph, r.report));
    std::printf("injected %zu attribute and %zu structural anomalies\n", r.report.attribute.size(),
                r.report.cliques.size() * inj_flags.struct_m);
  } else if (*tr) {
    const HetGraph g = load_bundle(tr_data);
    const PipelineConfig cfg = tr_flags.config();
    const TrainResult result = train_model(g, cfg.model, cfg.train);
    SavedModel m{cfg.model, schema_hash(g), to_json(cfg.train), result.params};
    save_model(m, tr_out);
    std::printf("loss %.6g -> %.6g over %zu epochs\n", result.loss_trace.front(),
                result.loss_trace.back(), result.loss_trace.size());
  } else if (*sc) {
    const HetGraph g = load_bundle(sc_data);
    const SavedModel m = load_model(sc_model);
    check_compatible(m, g);
    const NodeScores s = score_model(g, m.params, m.config, ScoreWeights{sc_l1, sc_l2});
    write_scores_csv(make_score_report(g, s), sc_out);
  } else if (*ev) {
    const auto start = std::chrono::steady_clock::now();
    const ScoreReport report = read_scores_csv(ev_scores);
    const LabelTable labels = read_labels_csv(ev_labels);
    MetricsReport m = evaluate_scores(report, labels);
    m.config = "{}";
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text(ev_out, to_json(m));
    std::printf("AUC %.6f\n", m.auc);
    if (!ev_plot.empty()) {
      std::vector<bool> y;
      for (const auto& r : report.rows) y.push_back(labels.at({r.type, r.local_index}).is_anomaly);
      LineChart chart{"ROC", "false positive rate", "true positive rate", {{"ROC", roc_curve(report.scores(), y)}}};
      std::string error;
      if (!write_svg(chart, ev_plot, &error)) std::cerr << "warning: plot not written: " << error << "\n";
    }
  } else if (*ab) {
    const HetGraph g = load_bundle(ab_data);
    ExperimentSpec spec;
    spec.kind = ExperimentKind::kAblation;
    spec.seeds = parse_seeds(ab_seeds);
    spec.base = ab_flags.config();
    print_experiment(run_ablation(g, spec, ab_out));
  } else if (*sw) {
    const HetGraph g = load_bundle(sw_data);
    ExperimentSpec spec;
    spec.kind = experiment_kind_from_string(sw_kind);
    spec.seeds = parse_seeds(sw_seeds);
    spec.base = sw_flags.config();
    for (const auto& item : split(sw_grid, ',')) {
      if (spec.kind == ExperimentKind::kLambdaSweep) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) throw ConfigError("lambda grid points are L1:L2, got '" + item + "'");
        spec.lambda_grid.emplace_back(parse_number<double>(parts[0], "lambda1"),
                                      parse_number<double>(parts[1], "lambda2"));
      } else {
        spec.grid.push_back(parse_number<double>(item, "grid value"));
      }
    }
    if (spec.kind == ExperimentKind::kRobustness) {
      spec.injection = sw_inject.config();
      spec.injection.seed = sw_inject_seed;
    }
    print_experiment(run_sweep(g, spec, sw_out));
  } else if (*gc) {
    const GradCheckFixture f = make_gradcheck_fixture(gc_seed);
    const GradCheckResult r = grad_check(f.graph, f.params, f.config, gc_samples, gc_seed);
    std::printf("{\"max_relative_error\": %.6g, \"worst_path\": \"%s\", \"samples\": %zu}\n",
                r.max_relative_error, r.worst_path.c_str(), r.samples);
    if (!(r.max_relative_error <= gc_tol)) {
      std::fprintf(stderr, "gradient check failed: %.3g > %.3g\n", r.max_relative_error, gc_tol);
      return 3;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ahead::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const ahead::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const ahead::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
