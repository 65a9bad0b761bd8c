#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "forestkernel/dataset.hpp"

namespace fk {

/// max_depth sentinel for the full-R.F. configuration. Recursion is then
/// bounded by min_node_size / zero gain, with a hard safety cap of 64 edges.
inline constexpr int kUnlimitedDepth = -1;
inline constexpr int kDepthSafetyCap = 64;

struct ForestParams {
  int tree_count = 50;
  int max_depth = 5;    // kUnlimitedDepth for no cap
  int mtry = 0;         // 0 = max(1, floor(p/3))
  int min_node_size = 5;
  bool bootstrap = true;

  bool unlimited_depth() const { return max_depth == kUnlimitedDepth; }
  int effective_mtry(std::size_t p) const;
  void validate() const;
};

/// One node of a regression tree. Internal nodes carry a split; leaves carry
/// a dense leaf_id, the mean response and sample count. Flat storage, index 0
/// is the root.
struct TreeNode {
  std::int32_t feature = -1;   // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t parent = -1;
  std::int32_t leaf_id = -1;
  double leaf_mean = 0.0;
  std::uint32_t sample_count = 0;
  std::uint16_t depth = 0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;
  std::int32_t leaf_count = 0;

  /// Routes x from the root (x[feature] <= threshold goes left) and returns
  /// the leaf_id of the terminal node reached.
  std::int32_t leaf_of(std::span<const double> x) const;

  /// Same routing, returning the node itself.
  const TreeNode& leaf_node_of(std::span<const double> x) const;

  /// leaf_id -> mean_response lookup.
  std::vector<double> leaf_means() const;

  /// leaf_id -> sample_count lookup.
  std::vector<std::uint32_t> leaf_counts() const;

  int max_node_depth() const;
};

struct Forest {
  std::vector<Tree> trees;
  ForestParams params;
  std::uint64_t seed = 0;
  std::size_t feature_count = 0;

  std::size_t tree_count() const { return trees.size(); }
};

/// n x B matrix of terminal-node ids: entries[i][b] is the leaf of training
/// row i in tree b. Row-major.
struct LeafMatrix {
  std::size_t n_rows = 0;
  std::size_t n_trees = 0;
  std::vector<std::uint32_t> entries;

  std::uint32_t at(std::size_t i, std::size_t b) const { return entries[i * n_trees + b]; }
  std::span<const std::uint32_t> row(std::size_t i) const {
    return {entries.data() + i * n_trees, n_trees};
  }
};

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

/// Exhaustive best split over `mtry` features sampled without replacement
/// (sampled via `rng_seed`). Candidate thresholds are midpoints of adjacent
/// sorted unique values; a split must strictly reduce the sum of squared
/// deviations and leave both children with >= min_node_size rows. Ties break
/// to the lowest feature index, then lowest threshold.
std::optional<Split> find_best_split(std::span<const std::uint32_t> rows,
                                     const Dataset& data, int mtry,
                                     int min_node_size, std::uint64_t rng_seed);

/// Trains the ensemble and routes every training row (in-bag or not) through
/// every final tree. Deterministic given (data, params, seed); trees may be
/// built in parallel since each owns a derived stream.
std::pair<Forest, LeafMatrix> fit_forest(const Dataset& data,
                                         const ForestParams& params,
                                         std::uint64_t seed, int threads = 0);

/// Plain forest-mean prediction: the Reduced R.F. / full R.F. baseline.
double predict_forest_mean(const Forest& forest, std::span<const double> x);

/// Leaf row of a query: leaf_of across all trees.
std::vector<std::uint32_t> leaf_row(const Forest& forest, std::span<const double> x);

}  // namespace fk
