#include "ahead/preprocess.hpp"

#include "ahead/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace ahead {

ViewPartition split_views(const HetGraph& g, const std::map<std::string, std::size_t>& views_per_type,
                          std::uint64_t seed) {
  for (const auto& [name, k] : views_per_type) {
    if (!g.find_type(name)) throw ConfigError("unknown node type '" + name + "'");
  }
  ViewPartition p;
  p.seed = seed;
  std::mt19937_64 rng(seed);
  for (const auto& t : g.node_types) {
    auto it = views_per_type.find(t.name);
    const std::size_t k = it == views_per_type.end() ? 1 : it->second;
    if (k < 1 || k > t.attr_dim) {
      throw ConfigError("node type " + t.name + ": view count " + std::to_string(k) +
                        " must lie in [1, " + std::to_string(t.attr_dim) + "]");
    }
    std::vector<std::size_t> perm(t.attr_dim);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    auto chunks = contiguous_views(t.attr_dim, k);
    for (auto& chunk : chunks) {
      for (auto& c : chunk) c = perm[c];
    }
    p.columns.push_back(std::move(chunks));
  }
  return p;
}

ViewPartition partition_of(const HetGraph& g) {
  ViewPartition p;
  for (const auto& t : g.node_types) p.columns.push_back(t.view_columns);
  return p;
}

HetGraph apply_partition(const HetGraph& g, const ViewPartition& p) {
  if (p.columns.size() != g.node_types.size()) {
    throw DataError("partition does not match the graph's node types");
  }
  HetGraph out = g;
  for (std::size_t a = 0; a < out.node_types.size(); ++a) {
    out.node_types[a].view_columns = p.columns[a];
  }
  require_valid(out);
  return out;
}

Matrix view_slice(const HetGraph& g, const ViewPartition& p, std::size_t type, std::size_t view) {
  if (type >= p.columns.size() || type >= g.attrs.size()) {
    throw std::out_of_range("view_slice: node type index out of range");
  }
  if (view >= p.columns[type].size()) {
    throw std::out_of_range("view_slice: view index out of range");
  }
  const auto& cols = p.columns[type][view];
  const Matrix& x = g.attrs[type];
  Matrix out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(cols[j]));
  }
  return out;
}

HetGraph standardize(const HetGraph& g) {
  HetGraph out = g;
  for (Matrix& x : out.attrs) {
    const Eigen::Index n = x.rows();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double mean = x.col(j).mean();
      double sd = 0.0;
      if (n > 1) sd = std::sqrt((x.col(j).array() - mean).square().sum() / static_cast<double>(n - 1));
      if (sd < 1e-12) {
        x.col(j).setZero();
      } else {
        x.col(j) = ((x.col(j).array() - mean) / sd).matrix();
      }
    }
  }
  return out;
}

}  // namespace ahead
