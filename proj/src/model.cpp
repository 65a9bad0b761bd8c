#include "forestkernel/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fk {

void FittedModel::validate() const {
  if (forest.trees.empty()) throw std::runtime_error("model: no trees");
  const std::size_t n = responses.size();
  if (n == 0) throw std::runtime_error("model: no responses");
  if (leaf_matrix.n_rows != n)
    throw std::runtime_error("model: leaf matrix row count != response count");
  if (leaf_matrix.n_trees != forest.trees.size())
    throw std::runtime_error("model: leaf matrix tree count != forest size");
  if (!(default_bandwidth > 0.0))
    throw std::runtime_error("model: bandwidth must be positive");
  for (double y : responses)
    if (!std::isfinite(y)) throw std::runtime_error("model: non-finite response");
  if (response_order.size() != n)
    throw std::runtime_error("model: response_order length != n");
  std::vector<bool> seen(n, false);
  for (std::uint32_t idx : response_order) {
    if (idx >= n || seen[idx]) throw std::runtime_error("model: response_order is not a permutation");
    seen[idx] = true;
  }
  for (std::size_t k = 1; k < n; ++k)
    if (responses[response_order[k - 1]] > responses[response_order[k]])
      throw std::runtime_error("model: response_order does not sort responses");
  for (std::size_t b = 0; b < leaf_matrix.n_trees; ++b) {
    const auto leaves = static_cast<std::uint32_t>(forest.trees[b].leaf_count);
    for (std::size_t i = 0; i < n; ++i)
      if (leaf_matrix.at(i, b) >= leaves)
        throw std::runtime_error("model: leaf id out of range in leaf matrix");
  }
}

namespace {

std::vector<std::uint32_t> sort_order(const std::vector<double>& values) {
  std::vector<std::uint32_t> order(values.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return values[a] < values[b];
  });
  return order;
}

}  // namespace

void FittedModel::replace_responses(std::vector<double> new_responses) {
  if (new_responses.size() != responses.size())
    throw std::invalid_argument("replace_responses: length mismatch");
  for (double y : new_responses)
    if (!std::isfinite(y)) throw std::invalid_argument("replace_responses: non-finite value");
  responses = std::move(new_responses);
  response_order = sort_order(responses);
}

FittedModel fit_model(const Dataset& data, const ForestParams& params,
                      std::uint64_t seed, double bandwidth, int threads) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("fit_model: bandwidth must be > 0");
  auto [forest, lm] = fit_forest(data, params, seed, threads);
  FittedModel model;
  model.forest = std::move(forest);
  model.leaf_matrix = std::move(lm);
  model.responses = data.responses;
  model.response_order = sort_order(model.responses);
  model.default_bandwidth = bandwidth;
  if (!model.forest.params.unlimited_depth())
    model.paths = build_leaf_paths(model.forest);
  return model;
}

std::vector<double> distance_vector_from_leaves(const FittedModel& model,
                                                std::span<const std::uint32_t> leaves,
                                                DistanceKind kind) {
  const std::size_t n = model.train_count();
  const std::size_t B = model.leaf_matrix.n_trees;
  if (leaves.size() != B)
    throw std::invalid_argument("distance_vector: leaf row length != tree count");
  std::vector<double> out(n);

  if (kind == DistanceKind::Breiman) {
    const double inv_b = 1.0 / static_cast<double>(B);
    const std::uint32_t* lm = model.leaf_matrix.entries.data();
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t matches = 0;
      const std::uint32_t* row = lm + i * B;
      for (std::size_t b = 0; b < B; ++b) matches += row[b] == leaves[b];
      out[i] = 1.0 - static_cast<double>(matches) * inv_b;
    }
    return out;
  }

  if (model.forest.params.unlimited_depth())
    throw std::invalid_argument(
        "mrca distance is unsupported on unlimited-depth forests; use breiman");
  if (model.paths.trees.size() != B)
    throw std::runtime_error("model: path tables missing");

  // Hoist the query leaf's table row per tree; per training row the distance
  // is then B lookups into small tables.
  std::vector<const std::uint16_t*> table_rows(B, nullptr);
  bool all_tables = true;
  for (std::size_t b = 0; b < B; ++b) {
    const TreePathTable& t = model.paths.trees[b];
    if (t.table.empty()) {
      all_tables = false;
      continue;
    }
    table_rows[b] = t.table.data() +
                    static_cast<std::size_t>(leaves[b]) * static_cast<std::size_t>(t.leaf_count);
  }
  const double scale = 1.0 / (static_cast<double>(B) *
                              static_cast<double>(model.forest.params.max_depth));
  const std::uint32_t* lm = model.leaf_matrix.entries.data();
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t* row = lm + i * B;
    std::int64_t total = 0;
    if (all_tables) {
      for (std::size_t b = 0; b < B; ++b) total += table_rows[b][row[b]];
    } else {
      for (std::size_t b = 0; b < B; ++b)
        total += table_rows[b]
                     ? table_rows[b][row[b]]
                     : model.paths.trees[b].distance(static_cast<std::int32_t>(leaves[b]),
                                                     static_cast<std::int32_t>(row[b]));
    }
    out[i] = static_cast<double>(total) * scale;
  }
  return out;
}

std::vector<double> distance_vector(const FittedModel& model, std::span<const double> x,
                                    DistanceKind kind) {
  auto leaves = leaf_row(model.forest, x);
  return distance_vector_from_leaves(model, leaves, kind);
}

double leaf_row_distance(const FittedModel& model, std::span<const std::uint32_t> a,
                         std::span<const std::uint32_t> b, DistanceKind kind) {
  if (kind == DistanceKind::Breiman) return breiman_distance(a, b);
  return forest_mrca_distance(model.forest, model.paths, a, b);
}

}  // namespace fk
