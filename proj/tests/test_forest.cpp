#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "forestkernel/data_synth.hpp"
#include "forestkernel/forest.hpp"
#include "forestkernel/rng.hpp"

using namespace fk;

namespace {

// 1-D step data: x < 0 -> y = 0, x >= 0 -> y = 1
Dataset step_data(std::size_t n, std::uint64_t seed) {
  Dataset data;
  data.n_rows = n;
  data.n_cols = 1;
  data.informative_count = 1;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform01() * 2.0 - 1.0;
    data.features.push_back(x);
    data.responses.push_back(x < 0.0 ? 0.0 : 1.0);
  }
  return data;
}

// Exhaustive split oracle over every feature and midpoint.
std::optional<Split> brute_force_split(const Dataset& data,
                                       const std::vector<std::uint32_t>& rows,
                                       int min_node_size) {
  std::optional<Split> best;
  for (std::size_t f = 0; f < data.n_cols; ++f) {
    std::vector<std::pair<double, double>> vals;
    for (auto r : rows)
      vals.emplace_back(data.features[r * data.n_cols + f], data.responses[r]);
    std::sort(vals.begin(), vals.end());
    double total = 0.0;
    for (auto& [x, y] : vals) total += y;
    double left = 0.0;
    for (std::size_t k = 1; k < vals.size(); ++k) {
      left += vals[k - 1].second;
      if (vals[k].first <= vals[k - 1].first) continue;
      if (k < static_cast<std::size_t>(min_node_size) ||
          vals.size() - k < static_cast<std::size_t>(min_node_size))
        continue;
      const double right = total - left;
      const double gain = left * left / k + right * right / (vals.size() - k) -
                          total * total / vals.size();
      if (gain <= 1e-9) continue;
      const double thr = (vals[k - 1].first + vals[k].first) / 2.0;
      if (!best || gain > best->gain) best = Split{static_cast<std::int32_t>(f), thr, gain};
    }
  }
  return best;
}

double within_leaf_sse(const Dataset& data, const LeafMatrix& lm, const Forest& forest) {
  double total = 0.0;
  for (std::size_t b = 0; b < lm.n_trees; ++b) {
    const std::size_t leaves = static_cast<std::size_t>(forest.trees[b].leaf_count);
    std::vector<double> sum(leaves, 0.0), sq(leaves, 0.0);
    std::vector<std::size_t> cnt(leaves, 0);
    for (std::size_t i = 0; i < lm.n_rows; ++i) {
      const auto l = lm.at(i, b);
      sum[l] += data.responses[i];
      sq[l] += data.responses[i] * data.responses[i];
      ++cnt[l];
    }
    for (std::size_t l = 0; l < leaves; ++l)
      if (cnt[l] > 0) total += sq[l] - sum[l] * sum[l] / static_cast<double>(cnt[l]);
  }
  return total;
}

}  // namespace

TEST_CASE("find_best_split locates the step boundary") {
  auto data = step_data(100, 3);
  std::vector<std::uint32_t> rows(100);
  std::iota(rows.begin(), rows.end(), 0u);

  auto split = find_best_split(rows, data, 1, 1, 99);
  REQUIRE(split.has_value());
  CHECK(split->feature == 0);

  double max_neg = -1.0, min_pos = 1.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const double x = data.features[i];
    if (x < 0.0) max_neg = std::max(max_neg, x);
    else min_pos = std::min(min_pos, x);
  }
  CHECK(split->threshold > max_neg);
  CHECK(split->threshold < min_pos);

  auto oracle = brute_force_split(data, rows, 1);
  REQUIRE(oracle.has_value());
  CHECK(split->threshold == oracle->threshold);
  CHECK(split->gain == doctest::Approx(oracle->gain));
}

TEST_CASE("find_best_split returns nothing on constant responses") {
  Dataset data;
  data.n_rows = 10;
  data.n_cols = 1;
  for (std::size_t i = 0; i < 10; ++i) {
    data.features.push_back(static_cast<double>(i));
    data.responses.push_back(3.5);
  }
  std::vector<std::uint32_t> rows(10);
  std::iota(rows.begin(), rows.end(), 0u);
  CHECK_FALSE(find_best_split(rows, data, 1, 1, 7).has_value());
}

TEST_CASE("find_best_split separates two distinct rows") {
  Dataset data;
  data.n_rows = 2;
  data.n_cols = 1;
  data.features = {0.0, 1.0};
  data.responses = {0.0, 5.0};
  std::vector<std::uint32_t> rows = {0, 1};
  auto split = find_best_split(rows, data, 1, 1, 1);
  REQUIRE(split.has_value());
  CHECK(split->threshold == doctest::Approx(0.5));
}

TEST_CASE("depth-5 trees never exceed 32 leaves and the depth bound") {
  auto data = generate(ScenarioKind::Friedman1, 400, 5, 21);
  ForestParams params{.tree_count = 50, .max_depth = 5};
  auto [forest, lm] = fit_forest(data, params, 77);
  for (const Tree& tree : forest.trees) {
    CHECK(tree.leaf_count <= 32);
    CHECK(tree.max_node_depth() <= 5);
  }
  CHECK(lm.n_rows == 400);
  CHECK(lm.n_trees == 50);
}

TEST_CASE("constant responses give single-leaf trees and a zero LeafMatrix") {
  auto data = generate(ScenarioKind::Friedman1, 100, 0, 2);
  std::fill(data.responses.begin(), data.responses.end(), 4.2);
  auto [forest, lm] = fit_forest(data, ForestParams{.tree_count = 10}, 5);
  for (const Tree& tree : forest.trees) CHECK(tree.leaf_count == 1);
  for (auto v : lm.entries) CHECK(v == 0);
}

TEST_CASE("depth-0 tree is one leaf holding the sample mean") {
  auto data = generate(ScenarioKind::Linear, 64, 0, 8);
  ForestParams params{.tree_count = 1, .max_depth = 0, .bootstrap = false};
  auto [forest, lm] = fit_forest(data, params, 1);
  REQUIRE(forest.trees[0].nodes.size() == 1);
  double mean = 0.0;
  for (double y : data.responses) mean += y;
  mean /= static_cast<double>(data.n_rows);
  CHECK(forest.trees[0].nodes[0].leaf_mean == doctest::Approx(mean));
}

TEST_CASE("LeafMatrix agrees with re-routing every training row") {
  auto data = generate(ScenarioKind::Friedman1, 150, 3, 13);
  auto [forest, lm] = fit_forest(data, ForestParams{.tree_count = 20, .max_depth = 4}, 13);
  for (std::size_t i = 0; i < data.n_rows; ++i)
    for (std::size_t b = 0; b < forest.trees.size(); ++b)
      CHECK(forest.trees[b].leaf_of(data.row(i)) == static_cast<std::int32_t>(lm.at(i, b)));
}

TEST_CASE("fits are deterministic, serial or parallel") {
  auto data = generate(ScenarioKind::Rectangular, 200, 5, 31);
  ForestParams params{.tree_count = 16, .max_depth = 5};
  auto [f1, lm1] = fit_forest(data, params, 99, 1);
  auto [f2, lm2] = fit_forest(data, params, 99, 4);
  CHECK(lm1.entries == lm2.entries);
  REQUIRE(f1.trees.size() == f2.trees.size());
  for (std::size_t b = 0; b < f1.trees.size(); ++b) {
    REQUIRE(f1.trees[b].nodes.size() == f2.trees[b].nodes.size());
    for (std::size_t k = 0; k < f1.trees[b].nodes.size(); ++k) {
      CHECK(f1.trees[b].nodes[k].feature == f2.trees[b].nodes[k].feature);
      CHECK(f1.trees[b].nodes[k].threshold == f2.trees[b].nodes[k].threshold);
      CHECK(f1.trees[b].nodes[k].leaf_id == f2.trees[b].nodes[k].leaf_id);
    }
  }
}

TEST_CASE("within-leaf SSE shrinks monotonically in max_depth") {
  auto data = generate(ScenarioKind::Friedman1, 300, 0, 19);
  double prev = std::numeric_limits<double>::infinity();
  for (int depth = 0; depth <= 6; ++depth) {
    ForestParams params{.tree_count = 5, .max_depth = depth, .bootstrap = false};
    auto [forest, lm] = fit_forest(data, params, 55);
    const double sse = within_leaf_sse(data, lm, forest);
    CHECK(sse <= prev + 1e-9);
    prev = sse;
  }
}

TEST_CASE("predict_forest_mean baseline behavior") {
  auto data = step_data(400, 12);

  SUBCASE("single-leaf forest returns the training mean") {
    ForestParams params{.tree_count = 4, .max_depth = 0, .bootstrap = false};
    auto [forest, lm] = fit_forest(data, params, 3);
    double mean = 0.0;
    for (double y : data.responses) mean += y;
    mean /= static_cast<double>(data.n_rows);
    const double x[] = {0.3};
    CHECK(predict_forest_mean(forest, x) == doctest::Approx(mean));
  }

  SUBCASE("deep forest recovers the step function") {
    ForestParams params{.tree_count = 30, .max_depth = kUnlimitedDepth, .min_node_size = 2};
    auto [forest, lm] = fit_forest(data, params, 3);
    const double pos[] = {0.5};
    const double neg[] = {-0.5};
    CHECK(std::abs(predict_forest_mean(forest, pos) - 1.0) < 0.1);
    CHECK(std::abs(predict_forest_mean(forest, neg) - 0.0) < 0.1);
  }

  SUBCASE("dimension mismatch throws") {
    auto [forest, lm] = fit_forest(data, ForestParams{.tree_count = 1}, 3);
    const double bad[] = {0.1, 0.2};
    CHECK_THROWS_AS(predict_forest_mean(forest, bad), std::invalid_argument);
  }
}

TEST_CASE("fit_forest rejects bad input") {
  Dataset empty;
  CHECK_THROWS(fit_forest(empty, ForestParams{}, 1));
  auto data = generate(ScenarioKind::Linear, 20, 0, 1);
  data.features[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(fit_forest(data, ForestParams{.min_node_size = 1}, 1));
}
