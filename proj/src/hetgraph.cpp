#include "ahead/hetgraph.hpp"

#include "ahead/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace ahead {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::size_t> NodeTypeSpec::view_dims() const {
  std::vector<std::size_t> dims;
  dims.reserve(view_columns.size());
  for (const auto& v : view_columns) dims.push_back(v.size());
  return dims;
}

const char* to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::kAttribute:
      return "attr";
    case AnomalyKind::kStructural:
      return "struct";
    case AnomalyKind::kNone:
      break;
  }
  return "none";
}

AnomalyKind anomaly_kind_from_string(const std::string& s) {
  if (s == "attr") return AnomalyKind::kAttribute;
  if (s == "struct") return AnomalyKind::kStructural;
  if (s == "none") return AnomalyKind::kNone;
  throw DataError("unknown anomaly kind '" + s + "'");
}

std::vector<std::vector<std::size_t>> contiguous_views(std::size_t dim, std::size_t views) {
  if (views == 0 || views > dim) {
    throw ConfigError("cannot split " + std::to_string(dim) + " columns into " +
                      std::to_string(views) + " views");
  }
  std::vector<std::vector<std::size_t>> out(views);
  const std::size_t base = dim / views;
  const std::size_t extra = dim % views;
  std::size_t col = 0;
  for (std::size_t v = 0; v < views; ++v) {
    const std::size_t size = base + (v < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) out[v].push_back(col++);
  }
  return out;
}

std::string reverse_relation_name(const std::string& name) { return "rev_" + name; }

std::size_t HetGraph::add_node_type(const std::string& name, Matrix attributes,
                                    std::size_t views) {
  if (find_type(name)) throw DataError("duplicate node type '" + name + "'");
  NodeTypeSpec spec;
  spec.name = name;
  spec.num_nodes = static_cast<std::size_t>(attributes.rows());
  spec.attr_dim = static_cast<std::size_t>(attributes.cols());
  spec.view_columns = contiguous_views(spec.attr_dim, views);
  node_types.push_back(std::move(spec));
  attrs.push_back(std::move(attributes));
  if (!labels.empty()) labels.emplace_back(node_types.back().num_nodes);
  return node_types.size() - 1;
}

std::size_t HetGraph::add_relation(const std::string& name, const std::string& src_type,
                                   const std::string& dst_type) {
  if (find_relation(name) || find_relation(reverse_relation_name(name))) {
    throw DataError("duplicate relation '" + name + "'");
  }
  if (!find_type(src_type) || !find_type(dst_type)) {
    throw DataError("relation '" + name + "' references an undeclared node type");
  }
  relations.push_back(RelationSpec{name, src_type, dst_type, std::nullopt});
  relations.push_back(RelationSpec{reverse_relation_name(name), dst_type, src_type, name});
  edges.emplace_back();
  edges.emplace_back();
  return relations.size() - 2;
}

namespace {

bool insert_sorted(std::vector<Edge>& list, Edge e) {
  auto it = std::lower_bound(list.begin(), list.end(), e);
  if (it != list.end() && *it == e) return false;
  list.insert(it, e);
  return true;
}

}  // namespace

bool HetGraph::add_edge(std::size_t relation, std::size_t src, std::size_t dst) {
  const std::size_t ns = node_types[src_type_index(relation)].num_nodes;
  const std::size_t nd = node_types[dst_type_index(relation)].num_nodes;
  if (src >= ns || dst >= nd) {
    throw DataError("edge (" + std::to_string(src) + "," + std::to_string(dst) +
                    ") out of range for relation '" + relations[relation].name + "'");
  }
  if (!insert_sorted(edges[relation], Edge{src, dst})) return false;
  insert_sorted(edges[mirror_of(relation)], Edge{dst, src});
  return true;
}

std::optional<std::size_t> HetGraph::find_type(const std::string& name) const {
  for (std::size_t i = 0; i < node_types.size(); ++i) {
    if (node_types[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> HetGraph::find_relation(const std::string& name) const {
  for (std::size_t i = 0; i < relations.size(); ++i) {
    if (relations[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t HetGraph::type_index(const std::string& name) const {
  if (auto i = find_type(name)) return *i;
  throw DataError("unknown node type '" + name + "'");
}

std::size_t HetGraph::relation_index(const std::string& name) const {
  if (auto i = find_relation(name)) return *i;
  throw DataError("unknown relation '" + name + "'");
}

std::size_t HetGraph::src_type_index(std::size_t relation) const {
  return type_index(relations.at(relation).src_type);
}

std::size_t HetGraph::dst_type_index(std::size_t relation) const {
  return type_index(relations.at(relation).dst_type);
}

std::size_t HetGraph::mirror_of(std::size_t relation) const {
  const RelationSpec& r = relations.at(relation);
  if (r.reversed_of) return relation_index(*r.reversed_of);
  return relation_index(reverse_relation_name(r.name));
}

std::vector<std::size_t> HetGraph::declared_relations() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < relations.size(); ++i) {
    if (!relations[i].is_reverse()) out.push_back(i);
  }
  return out;
}

std::size_t HetGraph::total_nodes() const {
  std::size_t n = 0;
  for (const auto& t : node_types) n += t.num_nodes;
  return n;
}

std::vector<std::vector<NodeLabel>> HetGraph::empty_labels() const {
  std::vector<std::vector<NodeLabel>> out;
  for (const auto& t : node_types) out.emplace_back(t.num_nodes);
  return out;
}

Matrix HetGraph::dense_adjacency(std::size_t relation) const {
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(node_types[src_type_index(relation)].num_nodes),
                          static_cast<Eigen::Index>(node_types[dst_type_index(relation)].num_nodes));
  for (const Edge& e : edges.at(relation)) {
    a(static_cast<Eigen::Index>(e.src), static_cast<Eigen::Index>(e.dst)) = 1.0;
  }
  return a;
}

bool HetGraph::operator==(const HetGraph& o) const {
  if (node_types != o.node_types || relations != o.relations || edges != o.edges ||
      labels != o.labels || attrs.size() != o.attrs.size()) {
    return false;
  }
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (attrs[i].rows() != o.attrs[i].rows() || attrs[i].cols() != o.attrs[i].cols()) return false;
    if (attrs[i] != o.attrs[i]) return false;
  }
  return true;
}

std::vector<std::string> validate_graph(const HetGraph& g) {
  std::vector<std::string> v;
  std::set<std::string> type_names;
  for (const auto& t : g.node_types) {
    if (!type_names.insert(t.name).second) v.push_back("duplicate node type: " + t.name);
    if (t.num_nodes < 1) v.push_back("node type " + t.name + " has no nodes");
    if (t.view_columns.empty()) v.push_back("node type " + t.name + " has no views");
    std::size_t sum = 0;
    std::vector<int> seen(t.attr_dim, 0);
    bool bad_col = false;
    for (const auto& view : t.view_columns) {
      if (view.empty()) v.push_back("node type " + t.name + " has an empty view");
      sum += view.size();
      for (std::size_t c : view) {
        if (c >= t.attr_dim) {
          bad_col = true;
        } else {
          ++seen[c];
        }
      }
    }
    if (sum != t.attr_dim) {
      v.push_back("node type " + t.name + ": view dims sum to " + std::to_string(sum) +
                  ", attr_dim is " + std::to_string(t.attr_dim));
    }
    if (bad_col || std::any_of(seen.begin(), seen.end(), [](int s) { return s != 1; })) {
      v.push_back("node type " + t.name + ": view columns do not partition the attributes");
    }
  }
  if (g.attrs.size() != g.node_types.size()) {
    v.push_back("attribute matrix count does not match node type count");
  } else {
    for (std::size_t a = 0; a < g.node_types.size(); ++a) {
      const auto& t = g.node_types[a];
      if (static_cast<std::size_t>(g.attrs[a].rows()) != t.num_nodes ||
          static_cast<std::size_t>(g.attrs[a].cols()) != t.attr_dim) {
        v.push_back("attribute shape mismatch for node type " + t.name);
      } else if (!g.attrs[a].allFinite()) {
        v.push_back("non-finite attribute value in node type " + t.name);
      }
    }
  }

  std::set<std::string> rel_names;
  bool relations_ok = true;
  for (const auto& r : g.relations) {
    if (!rel_names.insert(r.name).second) v.push_back("duplicate relation: " + r.name);
    if (!g.find_type(r.src_type) || !g.find_type(r.dst_type)) {
      v.push_back("relation " + r.name + " references an undeclared node type");
      relations_ok = false;
    }
  }
  if (g.edges.size() != g.relations.size()) {
    v.push_back("edge list count does not match relation count");
    return v;
  }
  if (!relations_ok) return v;
  for (std::size_t r = 0; r < g.relations.size(); ++r) {
    const auto& rel = g.relations[r];
    if (!rel.is_reverse()) {
      auto rev = g.find_relation(reverse_relation_name(rel.name));
      if (!rev || g.relations[*rev].reversed_of != rel.name) {
        v.push_back("relation " + rel.name + " has no reverse relation");
      }
    } else if (!g.find_relation(*rel.reversed_of)) {
      v.push_back("reverse relation " + rel.name + " mirrors an unknown relation");
    }
  }
  for (std::size_t r = 0; r < g.relations.size(); ++r) {
    const auto& rel = g.relations[r];
    const std::size_t ns = g.node_types[g.src_type_index(r)].num_nodes;
    const std::size_t nd = g.node_types[g.dst_type_index(r)].num_nodes;
    std::set<Edge> unique;
    for (const Edge& e : g.edges[r]) {
      if (e.src >= ns || e.dst >= nd) {
        v.push_back("edge index out of range: relation " + rel.name + " edge (" +
                    std::to_string(e.src) + "," + std::to_string(e.dst) + ")");
      }
      if (!unique.insert(e).second) {
        v.push_back("duplicate edge in relation " + rel.name + ": (" + std::to_string(e.src) +
                    "," + std::to_string(e.dst) + ")");
      }
    }
    if (rel.is_reverse()) continue;
    auto rev = g.find_relation(reverse_relation_name(rel.name));
    if (!rev) continue;
    std::set<Edge> mirrored;
    for (const Edge& e : g.edges[*rev]) mirrored.insert(Edge{e.dst, e.src});
    if (mirrored != unique) v.push_back("reverse relation mismatch: " + rel.name);
  }
  if (!g.labels.empty()) {
    if (g.labels.size() != g.node_types.size()) {
      v.push_back("label table count does not match node type count");
    } else {
      for (std::size_t a = 0; a < g.node_types.size(); ++a) {
        if (g.labels[a].size() != g.node_types[a].num_nodes) {
          v.push_back("label count mismatch for node type " + g.node_types[a].name);
          continue;
        }
        for (const auto& l : g.labels[a]) {
          if (l.is_anomaly != (l.kind != AnomalyKind::kNone)) {
            v.push_back("inconsistent label in node type " + g.node_types[a].name);
            break;
          }
        }
      }
    }
  }
  return v;
}

void require_valid(const HetGraph& g) {
  auto violations = validate_graph(g);
  if (violations.empty()) return;
  std::string msg = "invalid graph:";
  for (const auto& s : violations) msg += "\n  " + s;
  throw DataError(msg);
}

GlobalNodeIndex::GlobalNodeIndex(const HetGraph& g) {
  for (const auto& t : g.node_types) {
    offsets_.push_back(total_);
    counts_.push_back(t.num_nodes);
    total_ += t.num_nodes;
  }
}

std::size_t GlobalNodeIndex::to_global(std::size_t type, std::size_t local) const {
  if (type >= counts_.size() || local >= counts_[type]) {
    throw std::out_of_range("GlobalNodeIndex::to_global: index out of range");
  }
  return offsets_[type] + local;
}

std::pair<std::size_t, std::size_t> GlobalNodeIndex::to_local(std::size_t global) const {
  if (global >= total_) throw std::out_of_range("GlobalNodeIndex::to_local: index out of range");
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), global);
  std::size_t type = static_cast<std::size_t>(std::distance(offsets_.begin(), it)) - 1;
  // Skip over any zero-sized blocks sharing the same offset.
  while (counts_[type] == 0) --type;
  return {type, global - offsets_[type]};
}

GlobalNodeIndex global_index(const HetGraph& g) {
  require_valid(g);
  return GlobalNodeIndex(g);
}

// ---- bundle I/O -------------------------------------------------------------

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string where(const fs::path& file, std::size_t line) {
  return file.string() + ":" + std::to_string(line);
}

double parse_real(const std::string& s, const fs::path& file, std::size_t line) {
  double v = 0;
  auto first = s.data();
  auto last = s.data() + s.size();
  while (first != last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw DataError(where(file, line) + ": malformed number '" + s + "'");
  }
  return v;
}

std::size_t parse_index(const std::string& s, const fs::path& file, std::size_t line) {
  std::size_t v = 0;
  auto first = s.data();
  auto last = s.data() + s.size();
  while (first != last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw DataError(where(file, line) + ": malformed index '" + s + "'");
  }
  return v;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("missing file: " + p.string());
  return in;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write file: " + p.string());
  return out;
}

bool looks_like_header(const std::string& line) {
  return !line.empty() && !(std::isdigit(static_cast<unsigned char>(line[0])) ||
                            line[0] == '-' || line[0] == '+' || line[0] == '.');
}

}  // namespace

void save_bundle(const HetGraph& g, const fs::path& dir) {
  require_valid(g);
  fs::create_directories(dir / "attrs");
  fs::create_directories(dir / "edges");

  json schema;
  schema["format"] = "ahead-graph";
  schema["version"] = 1;
  schema["node_types"] = json::array();
  for (const auto& t : g.node_types) {
    schema["node_types"].push_back({{"name", t.name},
                                    {"num_nodes", t.num_nodes},
                                    {"view_dims", t.view_dims()},
                                    {"view_columns", t.view_columns}});
  }
  schema["relations"] = json::array();
  for (std::size_t r : g.declared_relations()) {
    const auto& rel = g.relations[r];
    schema["relations"].push_back(
        {{"name", rel.name}, {"src_type", rel.src_type}, {"dst_type", rel.dst_type}});
  }
  open_out(dir / "schema.json") << schema.dump(2) << "\n";

  for (std::size_t a = 0; a < g.node_types.size(); ++a) {
    auto out = open_out(dir / "attrs" / (g.node_types[a].name + ".csv"));
    const Matrix& x = g.attrs[a];
    std::string line;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      line.clear();
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (j) line.push_back(',');
        line += format_real(x(i, j));
      }
      line.push_back('\n');
      out << line;
    }
  }
  for (std::size_t r : g.declared_relations()) {
    auto out = open_out(dir / "edges" / (g.relations[r].name + ".csv"));
    out << "src,dst\n";
    for (const Edge& e : g.edges[r]) out << e.src << ',' << e.dst << '\n';
  }
  const fs::path labels_path = dir / "labels.csv";
  if (g.has_labels()) {
    auto out = open_out(labels_path);
    out << "type,local_index,is_anomaly,kind\n";
    for (std::size_t a = 0; a < g.node_types.size(); ++a) {
      for (std::size_t i = 0; i < g.labels[a].size(); ++i) {
        const auto& l = g.labels[a][i];
        out << g.node_types[a].name << ',' << i << ',' << (l.is_anomaly ? 1 : 0) << ','
            << to_string(l.kind) << '\n';
      }
    }
  } else if (fs::exists(labels_path)) {
    fs::remove(labels_path);
  }
}

HetGraph load_bundle(const fs::path& dir) {
  const fs::path schema_path = dir / "schema.json";
  json schema;
  {
    auto in = open_in(schema_path);
    try {
      in >> schema;
    } catch (const json::exception& e) {
      throw DataError(schema_path.string() + ": " + e.what());
    }
  }
  HetGraph g;
  try {
    for (const auto& t : schema.at("node_types")) {
      NodeTypeSpec spec;
      spec.name = t.at("name").get<std::string>();
      spec.num_nodes = t.at("num_nodes").get<std::size_t>();
      auto dims = t.at("view_dims").get<std::vector<std::size_t>>();
      spec.attr_dim = std::accumulate(dims.begin(), dims.end(), std::size_t{0});
      if (t.contains("view_columns")) {
        spec.view_columns = t.at("view_columns").get<std::vector<std::vector<std::size_t>>>();
        if (spec.view_dims() != dims) {
          throw DataError(schema_path.string() + ": view_columns disagree with view_dims for " +
                          spec.name);
        }
      } else {
        std::size_t col = 0;
        for (std::size_t d : dims) {
          std::vector<std::size_t> cols(d);
          std::iota(cols.begin(), cols.end(), col);
          col += d;
          spec.view_columns.push_back(std::move(cols));
        }
      }
      g.node_types.push_back(std::move(spec));
    }
    for (const auto& r : schema.at("relations")) {
      g.add_relation(r.at("name").get<std::string>(), r.at("src_type").get<std::string>(),
                     r.at("dst_type").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw DataError(schema_path.string() + ": schema error: " + e.what());
  }

  for (const auto& t : g.node_types) {
    const fs::path p = dir / "attrs" / (t.name + ".csv");
    auto in = open_in(p);
    Matrix x(static_cast<Eigen::Index>(t.num_nodes), static_cast<Eigen::Index>(t.attr_dim));
    std::string line;
    std::size_t row = 0;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line == "\r") continue;
      auto cells = split_commas(line);
      if (cells.size() != t.attr_dim) {
        throw DataError(where(p, lineno) + ": shape mismatch: expected " +
                        std::to_string(t.attr_dim) + " columns, found " +
                        std::to_string(cells.size()));
      }
      if (row >= t.num_nodes) {
        throw DataError(where(p, lineno) + ": shape mismatch: more than " +
                        std::to_string(t.num_nodes) + " rows");
      }
      for (std::size_t j = 0; j < cells.size(); ++j) {
        x(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) =
            parse_real(cells[j], p, lineno);
      }
      ++row;
    }
    if (row != t.num_nodes) {
      throw DataError(p.string() + ": shape mismatch: expected " + std::to_string(t.num_nodes) +
                      " rows, found " + std::to_string(row));
    }
    g.attrs.push_back(std::move(x));
  }

  for (std::size_t r : g.declared_relations()) {
    const fs::path p = dir / "edges" / (g.relations[r].name + ".csv");
    auto in = open_in(p);
    std::string line;
    std::size_t lineno = 0;
    std::vector<Edge> list;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line == "\r") continue;
      if (lineno == 1 && looks_like_header(line)) continue;
      auto cells = split_commas(line);
      if (cells.size() != 2) throw DataError(where(p, lineno) + ": expected 'src,dst'");
      list.push_back(Edge{parse_index(cells[0], p, lineno), parse_index(cells[1], p, lineno)});
    }
    std::sort(list.begin(), list.end());
    g.edges[r] = list;
    std::vector<Edge> mirrored;
    mirrored.reserve(list.size());
    for (const Edge& e : list) mirrored.push_back(Edge{e.dst, e.src});
    std::sort(mirrored.begin(), mirrored.end());
    g.edges[g.mirror_of(r)] = std::move(mirrored);
  }

  const fs::path lp = dir / "labels.csv";
  if (fs::exists(lp)) {
    g.labels = g.empty_labels();
    std::vector<std::vector<char>> seen;
    for (const auto& t : g.node_types) seen.emplace_back(t.num_nodes, 0);
    auto in = open_in(lp);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line == "\r") continue;
      if (lineno == 1 && line.rfind("type,", 0) == 0) continue;
      auto cells = split_commas(line);
      if (cells.size() != 4) {
        throw DataError(where(lp, lineno) + ": expected 'type,local_index,is_anomaly,kind'");
      }
      auto type = g.find_type(cells[0]);
      if (!type) throw DataError(where(lp, lineno) + ": unknown node type '" + cells[0] + "'");
      const std::size_t idx = parse_index(cells[1], lp, lineno);
      if (idx >= g.node_types[*type].num_nodes) {
        throw DataError(where(lp, lineno) + ": local index out of range");
      }
      if (cells[2] != "0" && cells[2] != "1") {
        throw DataError(where(lp, lineno) + ": is_anomaly must be 0 or 1");
      }
      AnomalyKind kind;
      try {
        kind = anomaly_kind_from_string(cells[3]);
      } catch (const DataError& e) {
        throw DataError(where(lp, lineno) + ": " + e.what());
      }
      g.labels[*type][idx] = NodeLabel{cells[2] == "1", kind};
      seen[*type][idx] = 1;
    }
    for (std::size_t a = 0; a < seen.size(); ++a) {
      if (std::find(seen[a].begin(), seen[a].end(), 0) != seen[a].end()) {
        throw DataError(lp.string() + ": missing label rows for node type " +
                        g.node_types[a].name);
      }
    }
  }
  require_valid(g);
  return g;
}

}  // namespace ahead
