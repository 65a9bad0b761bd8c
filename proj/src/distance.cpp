#include "forestkernel/distance.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fk {

DistanceKind distance_kind_from_string(const std::string& name) {
  if (name == "mrca" || name == "dino") return DistanceKind::Mrca;
  if (name == "breiman" || name == "ranbu") return DistanceKind::Breiman;
  throw std::invalid_argument("unknown distance kind '" + name +
                              "' (expected mrca|breiman)");
}

std::string to_string(DistanceKind kind) {
  return kind == DistanceKind::Mrca ? "mrca" : "breiman";
}

namespace {

std::int32_t path_distance(const std::vector<std::int32_t>& pa,
                           const std::vector<std::int32_t>& pb) {
  // longest common prefix; both paths start at the root
  std::size_t lcp = 0;
  const std::size_t limit = std::min(pa.size(), pb.size());
  while (lcp < limit && pa[lcp] == pb[lcp]) ++lcp;
  const auto depth_a = static_cast<std::int32_t>(pa.size() - 1);
  const auto depth_b = static_cast<std::int32_t>(pb.size() - 1);
  const auto mrca_depth = static_cast<std::int32_t>(lcp - 1);
  return std::max(depth_a - mrca_depth, depth_b - mrca_depth);
}

}  // namespace

std::int32_t TreePathTable::distance(std::int32_t leaf_a, std::int32_t leaf_b) const {
  if (!table.empty())
    return table[static_cast<std::size_t>(leaf_a) * static_cast<std::size_t>(leaf_count) +
                 static_cast<std::size_t>(leaf_b)];
  return path_distance(paths[static_cast<std::size_t>(leaf_a)],
                       paths[static_cast<std::size_t>(leaf_b)]);
}

TreePathTable build_tree_paths(const Tree& tree) {
  TreePathTable out;
  out.leaf_count = tree.leaf_count;
  out.leaf_depth.resize(static_cast<std::size_t>(tree.leaf_count));
  out.paths.resize(static_cast<std::size_t>(tree.leaf_count));
  for (std::size_t idx = 0; idx < tree.nodes.size(); ++idx) {
    const TreeNode& node = tree.nodes[idx];
    if (!node.is_leaf()) continue;
    std::vector<std::int32_t> path;
    for (std::int32_t cur = static_cast<std::int32_t>(idx); cur >= 0;
         cur = tree.nodes[static_cast<std::size_t>(cur)].parent)
      path.push_back(cur);
    std::reverse(path.begin(), path.end());
    out.leaf_depth[static_cast<std::size_t>(node.leaf_id)] =
        static_cast<std::int32_t>(path.size() - 1);
    out.paths[static_cast<std::size_t>(node.leaf_id)] = std::move(path);
  }
  if (tree.leaf_count <= kDistanceTableMaxLeaves) {
    const auto L = static_cast<std::size_t>(tree.leaf_count);
    out.table.resize(L * L);
    for (std::size_t a = 0; a < L; ++a)
      for (std::size_t b = a; b < L; ++b) {
        const auto d = static_cast<std::uint16_t>(path_distance(out.paths[a], out.paths[b]));
        out.table[a * L + b] = d;
        out.table[b * L + a] = d;
      }
  }
  return out;
}

LeafPathTable build_leaf_paths(const Forest& forest) {
  LeafPathTable out;
  out.trees.reserve(forest.trees.size());
  for (const Tree& tree : forest.trees) out.trees.push_back(build_tree_paths(tree));
  return out;
}

std::int32_t mrca_tree_distance(const LeafPathTable& paths, std::size_t tree_index,
                                std::int32_t leaf_a, std::int32_t leaf_b) {
  if (tree_index >= paths.trees.size())
    throw std::out_of_range("mrca_tree_distance: tree index out of range");
  const TreePathTable& t = paths.trees[tree_index];
  if (leaf_a < 0 || leaf_a >= t.leaf_count || leaf_b < 0 || leaf_b >= t.leaf_count)
    throw std::out_of_range("mrca_tree_distance: invalid leaf id");
  return t.distance(leaf_a, leaf_b);
}

double forest_mrca_distance(const Forest& forest, const LeafPathTable& paths,
                            std::span<const std::uint32_t> leaves_a,
                            std::span<const std::uint32_t> leaves_b) {
  if (forest.params.unlimited_depth())
    throw std::invalid_argument(
        "mrca distance is unsupported on unlimited-depth forests; use breiman");
  if (forest.params.max_depth < 1)
    throw std::invalid_argument("mrca distance requires max_depth >= 1");
  const std::size_t B = forest.trees.size();
  if (leaves_a.size() != B || leaves_b.size() != B)
    throw std::invalid_argument("forest_mrca_distance: leaf row length != tree count");
  std::int64_t total = 0;
  for (std::size_t b = 0; b < B; ++b)
    total += paths.trees[b].distance(static_cast<std::int32_t>(leaves_a[b]),
                                     static_cast<std::int32_t>(leaves_b[b]));
  return static_cast<double>(total) /
         (static_cast<double>(B) * static_cast<double>(forest.params.max_depth));
}

double breiman_distance(std::span<const std::uint32_t> leaves_a,
                        std::span<const std::uint32_t> leaves_b) {
  if (leaves_a.size() != leaves_b.size() || leaves_a.empty())
    throw std::invalid_argument("breiman_distance: leaf rows must be non-empty and equal length");
  std::size_t matches = 0;
  for (std::size_t b = 0; b < leaves_a.size(); ++b)
    if (leaves_a[b] == leaves_b[b]) ++matches;
  return 1.0 - static_cast<double>(matches) / static_cast<double>(leaves_a.size());
}

}  // namespace fk
