#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "forestkernel/forest.hpp"

namespace fk {

enum class DistanceKind { Mrca, Breiman };

DistanceKind distance_kind_from_string(const std::string& name);
std::string to_string(DistanceKind kind);

/// Root-to-leaf paths for one tree, plus (for small trees) a precomputed
/// leaf x leaf MRCA-distance table so query-time distance is a lookup.
struct TreePathTable {
  std::int32_t leaf_count = 0;
  std::vector<std::int32_t> leaf_depth;          // edges root -> leaf
  std::vector<std::vector<std::int32_t>> paths;  // node ids, root first
  std::vector<std::uint16_t> table;              // leaf_count^2, empty if too large

  /// MRCA distance in edges: max over the two branches from the MRCA.
  std::int32_t distance(std::int32_t leaf_a, std::int32_t leaf_b) const;
};

/// Leaf x leaf tables are materialized up to this many leaves per tree;
/// larger trees fall back to prefix scans over the stored paths.
inline constexpr std::int32_t kDistanceTableMaxLeaves = 256;

struct LeafPathTable {
  std::vector<TreePathTable> trees;
};

TreePathTable build_tree_paths(const Tree& tree);
LeafPathTable build_leaf_paths(const Forest& forest);

/// Per-tree MRCA distance with leaf-id validation (edge count, exact).
std::int32_t mrca_tree_distance(const LeafPathTable& paths, std::size_t tree_index,
                                std::int32_t leaf_a, std::int32_t leaf_b);

/// Forest-averaged MRCA distance rescaled to [0,1]: mean over trees of the
/// per-tree edge distance divided by max_depth. Requires a finite max_depth.
double forest_mrca_distance(const Forest& forest, const LeafPathTable& paths,
                            std::span<const std::uint32_t> leaves_a,
                            std::span<const std::uint32_t> leaves_b);

/// Complement of the classical proximity: 1 - (matching trees / B).
double breiman_distance(std::span<const std::uint32_t> leaves_a,
                        std::span<const std::uint32_t> leaves_b);

}  // namespace fk
