#include "forestkernel/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "forestkernel/parallel.hpp"
#include "forestkernel/rng.hpp"

namespace fk {

int ForestParams::effective_mtry(std::size_t p) const {
  if (mtry > 0) return std::min<int>(mtry, static_cast<int>(p));
  return std::max<int>(1, static_cast<int>(p / 3));
}

void ForestParams::validate() const {
  if (tree_count < 1) throw std::invalid_argument("forest: tree_count must be >= 1");
  if (max_depth < 0 && max_depth != kUnlimitedDepth)
    throw std::invalid_argument("forest: max_depth must be >= 0 or unlimited");
  if (min_node_size < 1) throw std::invalid_argument("forest: min_node_size must be >= 1");
  if (mtry < 0) throw std::invalid_argument("forest: mtry must be >= 0");
}

std::int32_t Tree::leaf_of(std::span<const double> x) const {
  return leaf_node_of(x).leaf_id;
}

const TreeNode& Tree::leaf_node_of(std::span<const double> x) const {
  std::int32_t idx = 0;
  while (!nodes[idx].is_leaf()) {
    const TreeNode& node = nodes[idx];
    idx = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                      : node.right;
  }
  return nodes[idx];
}

std::vector<double> Tree::leaf_means() const {
  std::vector<double> out(static_cast<std::size_t>(leaf_count));
  for (const TreeNode& node : nodes)
    if (node.is_leaf()) out[static_cast<std::size_t>(node.leaf_id)] = node.leaf_mean;
  return out;
}

std::vector<std::uint32_t> Tree::leaf_counts() const {
  std::vector<std::uint32_t> out(static_cast<std::size_t>(leaf_count));
  for (const TreeNode& node : nodes)
    if (node.is_leaf()) out[static_cast<std::size_t>(node.leaf_id)] = node.sample_count;
  return out;
}

int Tree::max_node_depth() const {
  int d = 0;
  for (const TreeNode& node : nodes) d = std::max(d, static_cast<int>(node.depth));
  return d;
}

namespace {

struct SplitScan {
  // (value, response) pairs of the rows reaching the node, reused per feature
  std::vector<std::pair<double, double>> vals;
};

// Best split on one feature; assumes vals sorted by value.
std::optional<Split> best_on_feature(std::int32_t feature,
                                     const std::vector<std::pair<double, double>>& vals,
                                     int min_node_size, double total_sum,
                                     double gain_floor) {
  const std::size_t m = vals.size();
  std::optional<Split> best;
  double left_sum = 0.0;
  const double total_term = total_sum * total_sum / static_cast<double>(m);
  for (std::size_t k = 1; k < m; ++k) {
    left_sum += vals[k - 1].second;
    if (vals[k].first <= vals[k - 1].first) continue;
    const auto n_left = static_cast<double>(k);
    const auto n_right = static_cast<double>(m - k);
    if (k < static_cast<std::size_t>(min_node_size) ||
        m - k < static_cast<std::size_t>(min_node_size))
      continue;
    const double right_sum = total_sum - left_sum;
    const double gain =
        left_sum * left_sum / n_left + right_sum * right_sum / n_right - total_term;
    if (gain <= gain_floor) continue;
    const double threshold = vals[k - 1].first + (vals[k].first - vals[k - 1].first) / 2.0;
    if (!best || gain > best->gain ||
        (gain == best->gain && threshold < best->threshold)) {
      best = Split{feature, threshold, gain};
    }
  }
  return best;
}

std::optional<Split> search_split(std::span<const std::uint32_t> rows,
                                  const Dataset& data,
                                  std::span<const std::int32_t> candidates,
                                  int min_node_size, SplitScan& scan) {
  const std::size_t m = rows.size();
  double total_sum = 0.0, total_sq = 0.0;
  for (std::uint32_t r : rows) {
    const double y = data.responses[r];
    total_sum += y;
    total_sq += y * y;
  }
  const double node_sse = total_sq - total_sum * total_sum / static_cast<double>(m);
  // all-equal responses: nothing to gain
  if (node_sse <= 1e-12 * std::max(1.0, total_sq)) return std::nullopt;
  const double gain_floor = 1e-12 * std::max(1.0, total_sq);

  std::optional<Split> best;
  for (std::int32_t f : candidates) {
    scan.vals.clear();
    for (std::uint32_t r : rows)
      scan.vals.emplace_back(data.features[r * data.n_cols + static_cast<std::size_t>(f)],
                             data.responses[r]);
    std::sort(scan.vals.begin(), scan.vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    auto cand = best_on_feature(f, scan.vals, min_node_size, total_sum, gain_floor);
    if (!cand) continue;
    // ties resolve to the lowest feature index, then lowest threshold;
    // candidates are iterated in ascending feature order
    if (!best || cand->gain > best->gain) best = cand;
  }
  return best;
}

std::vector<std::int32_t> sample_features(std::size_t p, int mtry, Rng& rng) {
  std::vector<std::int32_t> all(p);
  std::iota(all.begin(), all.end(), 0);
  for (int k = 0; k < mtry; ++k) {
    std::size_t j = static_cast<std::size_t>(k) +
                    rng.below(p - static_cast<std::uint64_t>(k));
    std::swap(all[static_cast<std::size_t>(k)], all[j]);
  }
  all.resize(static_cast<std::size_t>(mtry));
  std::sort(all.begin(), all.end());
  return all;
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const ForestParams& params, std::uint64_t seed)
      : data_(data), params_(params), mtry_(params.effective_mtry(data.n_cols)),
        depth_cap_(params.unlimited_depth() ? kDepthSafetyCap : params.max_depth),
        rng_(seed) {}

  Tree build() {
    std::vector<std::uint32_t> rows(data_.n_rows);
    if (params_.bootstrap) {
      for (auto& r : rows)
        r = static_cast<std::uint32_t>(rng_.below(data_.n_rows));
    } else {
      std::iota(rows.begin(), rows.end(), 0u);
    }
    tree_.nodes.reserve(64);
    grow(rows, 0, static_cast<std::uint32_t>(rows.size()), 0, -1);
    return std::move(tree_);
  }

 private:
  // Builds the subtree over rows_[begin, end); returns its node index.
  std::int32_t grow(std::vector<std::uint32_t>& rows, std::uint32_t begin,
                    std::uint32_t end, int depth, std::int32_t parent) {
    const std::int32_t idx = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    tree_.nodes[idx].parent = parent;
    tree_.nodes[idx].depth = static_cast<std::uint16_t>(depth);
    tree_.nodes[idx].sample_count = end - begin;

    std::optional<Split> split;
    const std::uint32_t m = end - begin;
    if (depth < depth_cap_ && m >= 2 * static_cast<std::uint32_t>(params_.min_node_size) &&
        m >= 2) {
      std::span<const std::uint32_t> node_rows(rows.data() + begin, m);
      auto candidates = sample_features(data_.n_cols, mtry_, rng_);
      split = search_split(node_rows, data_, candidates, params_.min_node_size, scan_);
    }

    if (!split) {
      double sum = 0.0;
      for (std::uint32_t k = begin; k < end; ++k) sum += data_.responses[rows[k]];
      tree_.nodes[idx].leaf_id = tree_.leaf_count++;
      tree_.nodes[idx].leaf_mean = sum / static_cast<double>(m);
      return idx;
    }

    auto mid_it = std::partition(
        rows.begin() + begin, rows.begin() + end, [&](std::uint32_t r) {
          return data_.features[r * data_.n_cols +
                                static_cast<std::size_t>(split->feature)] <=
                 split->threshold;
        });
    const std::uint32_t mid = static_cast<std::uint32_t>(mid_it - rows.begin());

    tree_.nodes[idx].feature = split->feature;
    tree_.nodes[idx].threshold = split->threshold;
    const std::int32_t left = grow(rows, begin, mid, depth + 1, idx);
    tree_.nodes[idx].left = left;
    const std::int32_t right = grow(rows, mid, end, depth + 1, idx);
    tree_.nodes[idx].right = right;
    return idx;
  }

  const Dataset& data_;
  const ForestParams& params_;
  int mtry_;
  int depth_cap_;
  Rng rng_;
  Tree tree_;
  SplitScan scan_;
};

}  // namespace

std::optional<Split> find_best_split(std::span<const std::uint32_t> rows,
                                     const Dataset& data, int mtry,
                                     int min_node_size, std::uint64_t rng_seed) {
  if (rows.size() < 2) throw std::invalid_argument("find_best_split: need >= 2 rows");
  Rng rng(rng_seed);
  auto candidates =
      sample_features(data.n_cols, std::min<int>(mtry, static_cast<int>(data.n_cols)), rng);
  SplitScan scan;
  return search_split(rows, data, candidates, min_node_size, scan);
}

std::pair<Forest, LeafMatrix> fit_forest(const Dataset& data,
                                         const ForestParams& params,
                                         std::uint64_t seed, int threads) {
  params.validate();
  data.validate();
  if (data.responses.empty())
    throw std::invalid_argument("fit_forest: dataset has no responses");
  if (data.n_rows < static_cast<std::size_t>(params.min_node_size))
    throw std::invalid_argument("fit_forest: fewer rows than min_node_size");

  Forest forest;
  forest.params = params;
  forest.seed = seed;
  forest.feature_count = data.n_cols;
  forest.trees.resize(static_cast<std::size_t>(params.tree_count));

  LeafMatrix lm;
  lm.n_rows = data.n_rows;
  lm.n_trees = static_cast<std::size_t>(params.tree_count);
  lm.entries.resize(lm.n_rows * lm.n_trees);

  parallel_for(forest.trees.size(), threads, [&](std::size_t b) {
    TreeBuilder builder(data, params, derive_seed(seed, b));
    forest.trees[b] = builder.build();
    const Tree& tree = forest.trees[b];
    for (std::size_t i = 0; i < data.n_rows; ++i)
      lm.entries[i * lm.n_trees + b] =
          static_cast<std::uint32_t>(tree.leaf_of(data.row(i)));
  });
  return {std::move(forest), std::move(lm)};
}

double predict_forest_mean(const Forest& forest, std::span<const double> x) {
  if (x.size() != forest.feature_count)
    throw std::invalid_argument("predict_forest_mean: query has " +
                                std::to_string(x.size()) + " features, model expects " +
                                std::to_string(forest.feature_count));
  double sum = 0.0;
  for (const Tree& tree : forest.trees) sum += tree.leaf_node_of(x).leaf_mean;
  return sum / static_cast<double>(forest.trees.size());
}

std::vector<std::uint32_t> leaf_row(const Forest& forest, std::span<const double> x) {
  if (x.size() != forest.feature_count)
    throw std::invalid_argument("leaf_row: query has " + std::to_string(x.size()) +
                                " features, model expects " +
                                std::to_string(forest.feature_count));
  std::vector<std::uint32_t> out(forest.trees.size());
  for (std::size_t b = 0; b < forest.trees.size(); ++b)
    out[b] = static_cast<std::uint32_t>(forest.trees[b].leaf_of(x));
  return out;
}

}  // namespace fk
