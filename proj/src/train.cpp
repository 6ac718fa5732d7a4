#include "ahead/train.hpp"

#include "ahead/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <set>

namespace ahead {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be a non-negative finite number");
  }
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be non-negative");
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("moment decay rates must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam epsilon must be positive");
  if (precision_bits != 64) throw ConfigError("only 64-bit precision is supported");
}

std::string to_json(const TrainConfig& cfg) {
  nlohmann::json j;
  j["learning_rate"] = cfg.learning_rate;
  j["weight_decay"] = cfg.weight_decay;
  j["max_epochs"] = cfg.max_epochs;
  j["seed"] = cfg.seed;
  j["beta1"] = cfg.beta1;
  j["beta2"] = cfg.beta2;
  j["adam_epsilon"] = cfg.adam_epsilon;
  j["precision_bits"] = cfg.precision_bits;
  return j.dump();
}

void AdamOptimizer::step(ParamStore& params, const std::map<std::string, Matrix>& grads) {
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t);
  for (const auto& [path, grad] : grads) {
    Matrix& p = params.get_mut(path);
    Matrix g = grad;
    if (cfg_.weight_decay != 0.0) g += cfg_.weight_decay * p;
    auto [mit, m_new] = m_.try_emplace(path, Matrix::Zero(p.rows(), p.cols()));
    auto [vit, v_new] = v_.try_emplace(path, Matrix::Zero(p.rows(), p.cols()));
    Matrix& m = mit->second;
    Matrix& v = vit->second;
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    p.array() -= cfg_.learning_rate * (m.array() / c1) /
                 ((v.array() / c2).sqrt() + cfg_.adam_epsilon);
  }
}

TrainResult train_model(const HetGraph& g, const ModelConfig& model, const TrainConfig& train) {
  return train_model(g, model, train, init_params(g, model, train.seed));
}

TrainResult train_model(const HetGraph& g, const ModelConfig& model, const TrainConfig& train,
                        ParamStore initial) {
  train.validate();
  model.validate();
  require_valid(g);
  TrainResult result{std::move(initial), {}};
  const GraphTopology topo(g);
  AdamOptimizer optimizer(train);
  for (std::size_t epoch = 0; epoch < train.max_epochs; ++epoch) {
    ad::Tape tape;
    BoundParams bound(tape, result.params);
    ForwardVars vars;
    try {
      vars = forward(bound, g, topo, model);
    } catch (const NumericalError& e) {
      throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
    const double loss = tape.value(vars.loss)(0, 0);
    result.loss_trace.push_back(loss);
    tape.backward(vars.loss);
    optimizer.step(result.params, bound.gradients());
    if (!result.params.all_finite()) {
      throw NumericalError("non-finite parameters after epoch " + std::to_string(epoch));
    }
  }
  return result;
}

GradCheckResult grad_check(const HetGraph& g, const ParamStore& params, const ModelConfig& cfg,
                           std::size_t samples, std::uint64_t seed) {
  const double step = 1e-6;
  ad::Tape tape;
  BoundParams bound(tape, params);
  const GraphTopology topo(g);
  ForwardVars vars = forward(bound, g, topo, cfg);
  // Bind every parameter so unused ones report a zero gradient.
  for (const auto& [path, m] : params.entries()) bound(path);
  tape.backward(vars.loss);
  const auto grads = bound.gradients();

  std::vector<std::string> paths;
  for (const auto& [path, m] : params.entries()) paths.push_back(path);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_path(0, paths.size() - 1);

  GradCheckResult result;
  ParamStore probe = params;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::string& path = paths[pick_path(rng)];
    const Matrix& m = params.get(path);
    std::uniform_int_distribution<Eigen::Index> pick_entry(0, m.size() - 1);
    const Eigen::Index flat = pick_entry(rng);
    const Eigen::Index row = flat / m.cols();
    const Eigen::Index col = flat % m.cols();

    auto it = grads.find(path);
    const double analytic = it == grads.end() ? 0.0 : it->second(row, col);
    Matrix& target = probe.get_mut(path);
    const double original = target(row, col);
    target(row, col) = original + step;
    const double up = forward_loss(g, probe, cfg).loss;
    target(row, col) = original - step;
    const double down = forward_loss(g, probe, cfg).loss;
    target(row, col) = original;
    const double numeric = (up - down) / (2.0 * step);

    const double err = std::abs(analytic - numeric) /
                       std::max({1.0, std::abs(analytic), std::abs(numeric)});
    if (err > result.max_relative_error || result.worst_path.empty()) {
      if (err >= result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_path = path + "[" + std::to_string(row) + "," + std::to_string(col) + "]";
      }
    }
    ++result.samples;
  }
  return result;
}

GradCheckFixture make_gradcheck_fixture(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> attr(0.2, 1.5);
  auto random_matrix = [&](Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = attr(rng);
    }
    return m;
  };
  GradCheckFixture f;
  HetGraph& g = f.graph;
  g.add_node_type("article", random_matrix(6, 6), 2);
  g.add_node_type("author", random_matrix(5, 4), 2);
  const std::size_t writes = g.add_relation("writes", "author", "article");
  const std::size_t cites = g.add_relation("cites", "article", "article");
  for (std::size_t a = 0; a < 5; ++a) {
    g.add_edge(writes, a, a);
    g.add_edge(writes, a, (a + 2) % 6);
  }
  g.add_edge(writes, 4, 5);
  for (std::size_t p = 0; p < 6; ++p) g.add_edge(cites, p, (p + 1) % 6);
  g.add_edge(cites, 0, 3);

  f.config.encoder.hidden_dim = 8;
  f.config.encoder.out_dim = 4;
  f.config.encoder.heads = 2;
  f.config.encoder.depth = 2;
  f.params = init_params(g, f.config, seed);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  for (const auto& [path, m] : f.params.entries()) {
    const bool offset_like = path.ends_with(".bias") || path == paths::kMu ||
                             path == paths::kAlpha || path == paths::kNodeTypeAttention;
    if (!offset_like) continue;
    Matrix& p = f.params.get_mut(path);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.cols(); ++j) p(i, j) += jitter(rng);
    }
  }
  return f;
}

// ---- model files -------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'A', 'H', 'E', 'A', 'D', 'M', 'D', 'L'};

template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::string& what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("truncated model file while reading " + what);
  return value;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in, const std::string& what) {
  const auto n = read_pod<std::uint32_t>(in, what);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw DataError("truncated model file while reading " + what);
  return s;
}

}  // namespace

void save_model(const SavedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(out, kModelFormatVersion);
  write_pod<std::uint64_t>(out, model.schema_hash);
  write_string(out, to_json(model.config));
  write_string(out, model.train_echo);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(model.params.size()));
  for (const auto& [name, m] : model.params.entries()) {
    write_string(out, name);
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) write_pod<double>(out, m(i, j));
    }
  }
  if (!out) throw DataError("failed writing model file: " + path.string());
}

SavedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing model file: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path.string() + ": not a model file");
  }
  const auto version = read_pod<std::uint32_t>(in, "version");
  if (version != kModelFormatVersion) {
    throw DataError(path.string() + ": model format version " + std::to_string(version) +
                    " is not supported (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  SavedModel model;
  model.schema_hash = read_pod<std::uint64_t>(in, "schema hash");
  model.config = model_config_from_json(read_string(in, "config"));
  model.train_echo = read_string(in, "train echo");
  const auto count = read_pod<std::uint32_t>(in, "array count");
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name = read_string(in, "array path");
    const auto rows = read_pod<std::uint64_t>(in, "rows of " + name);
    const auto cols = read_pod<std::uint64_t>(in, "cols of " + name);
    if (rows > (1ULL << 32) || cols > (1ULL << 32)) throw DataError("implausible shape for " + name);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = read_pod<double>(in, name);
    }
    model.params.add(name, std::move(m));
  }
  return model;
}

void check_compatible(const SavedModel& model, const HetGraph& g) {
  if (model.schema_hash != schema_hash(g)) {
    throw DataError("model was trained on a different graph schema (views or relations differ)");
  }
  const ParamStore expected = init_params(g, model.config, 0);
  for (const auto& [path, m] : expected.entries()) {
    if (!model.params.contains(path)) throw DataError("model file is missing parameter " + path);
    const Matrix& have = model.params.get(path);
    if (have.rows() != m.rows() || have.cols() != m.cols()) {
      throw DataError("parameter " + path + " has the wrong shape");
    }
  }
  for (const auto& [path, m] : model.params.entries()) {
    if (!expected.contains(path)) throw DataError("model file has unexpected parameter " + path);
  }
}

}  // namespace ahead
