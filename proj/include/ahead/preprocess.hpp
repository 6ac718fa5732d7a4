#pragma once

#include "ahead/hetgraph.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ahead {

/// Per node type, an ordered list of disjoint column sets (one per view).
struct ViewPartition {
  std::vector<std::vector<std::vector<std::size_t>>> columns;
  std::uint64_t seed = 0;
};

/// Seeded random split of each type's attribute columns into views: the
/// columns are permuted, then cut into contiguous near-equal chunks. Types
/// missing from `views_per_type` get a single view.
ViewPartition split_views(const HetGraph& g, const std::map<std::string, std::size_t>& views_per_type,
                          std::uint64_t seed);

/// The partition currently recorded in the graph schema.
ViewPartition partition_of(const HetGraph& g);

/// Copy of g whose schema records partition p.
HetGraph apply_partition(const HetGraph& g, const ViewPartition& p);

/// Columns of view `view` of node type `type`, gathered in partition order.
Matrix view_slice(const HetGraph& g, const ViewPartition& p, std::size_t type, std::size_t view);

/// Column standardization to mean 0 and sample std 1; columns whose std is
/// below 1e-12 become zero.
HetGraph standardize(const HetGraph& g);

}  // namespace ahead
