#pragma once

// Heterogeneous graph data model.
//
// Node types own an attribute matrix and a partition of its columns into
// views. Every declared relation is paired with an auto-generated reverse
// relation so that both endpoint types receive messages in the encoder; the
// reverse edge list is always the transpose of the forward one.

#include "ahead/autodiff.hpp"

#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ahead {

struct NodeTypeSpec {
  std::string name;
  std::size_t num_nodes = 0;
  std::size_t attr_dim = 0;
  /// Column indices of each view, in view order. Together they partition
  /// [0, attr_dim).
  std::vector<std::vector<std::size_t>> view_columns;

  std::vector<std::size_t> view_dims() const;
  std::size_t num_views() const { return view_columns.size(); }

  bool operator==(const NodeTypeSpec&) const = default;
};

struct RelationSpec {
  std::string name;
  std::string src_type;
  std::string dst_type;
  /// Set on auto-generated reverse relations: the declared relation mirrored.
  std::optional<std::string> reversed_of;

  bool is_reverse() const { return reversed_of.has_value(); }
  bool operator==(const RelationSpec&) const = default;
};

struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  auto operator<=>(const Edge&) const = default;
};

enum class AnomalyKind { kNone, kAttribute, kStructural };

const char* to_string(AnomalyKind kind);
AnomalyKind anomaly_kind_from_string(const std::string& s);

struct NodeLabel {
  bool is_anomaly = false;
  AnomalyKind kind = AnomalyKind::kNone;
  bool operator==(const NodeLabel&) const = default;
};

/// Contiguous near-equal chunking of [0, dim) into `views` views.
std::vector<std::vector<std::size_t>> contiguous_views(std::size_t dim, std::size_t views);

/// Name given to the reverse of relation `name`.
std::string reverse_relation_name(const std::string& name);

struct HetGraph {
  std::vector<NodeTypeSpec> node_types;
  /// Each declared relation is immediately followed by its reverse.
  std::vector<RelationSpec> relations;
  /// attrs[a] is num_nodes x attr_dim for node_types[a].
  std::vector<Matrix> attrs;
  /// edges[r] is sorted and duplicate-free for a valid graph.
  std::vector<std::vector<Edge>> edges;
  /// Empty, or labels[a] has num_nodes entries.
  std::vector<std::vector<NodeLabel>> labels;

  /// Adds a node type with contiguous near-equal views.
  std::size_t add_node_type(const std::string& name, Matrix attributes, std::size_t views = 1);
  /// Adds relation `name` and its reverse. Returns the forward index.
  std::size_t add_relation(const std::string& name, const std::string& src_type,
                           const std::string& dst_type);
  /// Inserts (src, dst) into relation r and its mirror. Returns false if the
  /// edge already existed.
  bool add_edge(std::size_t relation, std::size_t src, std::size_t dst);

  std::optional<std::size_t> find_type(const std::string& name) const;
  std::optional<std::size_t> find_relation(const std::string& name) const;
  std::size_t type_index(const std::string& name) const;
  std::size_t relation_index(const std::string& name) const;
  std::size_t src_type_index(std::size_t relation) const;
  std::size_t dst_type_index(std::size_t relation) const;
  /// Index of the paired reverse (or forward) relation.
  std::size_t mirror_of(std::size_t relation) const;
  /// Indices of declared (non-reverse) relations, in order.
  std::vector<std::size_t> declared_relations() const;

  std::size_t total_nodes() const;
  bool has_labels() const { return !labels.empty(); }
  /// Labels with every node normal, shaped to this graph.
  std::vector<std::vector<NodeLabel>> empty_labels() const;

  /// Dense 0/1 adjacency of relation r (n_src x n_dst).
  Matrix dense_adjacency(std::size_t relation) const;

  bool operator==(const HetGraph&) const;
};

/// Lists every violated invariant; empty iff the graph is well formed.
std::vector<std::string> validate_graph(const HetGraph& g);

/// Throws DataError listing the violations if the graph is not valid.
void require_valid(const HetGraph& g);

/// Bijection between (type, local index) and a global index formed by
/// concatenating per-type blocks in declaration order.
class GlobalNodeIndex {
 public:
  GlobalNodeIndex() = default;
  explicit GlobalNodeIndex(const HetGraph& g);

  std::size_t size() const { return total_; }
  std::size_t num_types() const { return offsets_.size(); }
  std::size_t to_global(std::size_t type, std::size_t local) const;
  std::pair<std::size_t, std::size_t> to_local(std::size_t global) const;
  std::size_t offset(std::size_t type) const { return offsets_.at(type); }
  std::size_t count(std::size_t type) const { return counts_.at(type); }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

/// Validates g before building the index.
GlobalNodeIndex global_index(const HetGraph& g);

/// Writes the bundle directory layout (schema.json, attrs/, edges/,
/// labels.csv when labels are present).
void save_bundle(const HetGraph& g, const std::filesystem::path& dir);
HetGraph load_bundle(const std::filesystem::path& dir);

/// Writes `value` with 17 significant digits.
std::string format_real(double value);

}  // namespace ahead
