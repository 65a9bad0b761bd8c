#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "forestkernel/dataset.hpp"
#include "forestkernel/distance.hpp"
#include "forestkernel/forest.hpp"

namespace fk {

/// The deployable predictor: fixed forest, compressed per-row leaf
/// assignments, training responses and a default bandwidth. Immutable once
/// fitted; everything query-time needs lives here — raw training features
/// are never consulted.
struct FittedModel {
  Forest forest;
  LeafMatrix leaf_matrix;
  std::vector<double> responses;
  std::vector<std::uint32_t> response_order;  // permutation sorting responses ascending
  double default_bandwidth = 0.2;
  LeafPathTable paths;  // empty for unlimited-depth forests

  std::size_t train_count() const { return responses.size(); }
  std::size_t feature_count() const { return forest.feature_count; }

  /// Re-checks the structural invariants; throws on violation.
  void validate() const;

  /// Swaps in a new response vector of the same length without touching the
  /// trees, enabling model reuse for alternative targets.
  void replace_responses(std::vector<double> new_responses);
};

FittedModel fit_model(const Dataset& data, const ForestParams& params,
                      std::uint64_t seed, double bandwidth = 0.2, int threads = 0);

/// d(x, X_i) for every training row, computed from the query's leaf row and
/// the stored LeafMatrix only.
std::vector<double> distance_vector(const FittedModel& model, std::span<const double> x,
                                    DistanceKind kind);

/// Same, starting from a precomputed leaf row (used for pairwise exports).
std::vector<double> distance_vector_from_leaves(const FittedModel& model,
                                                std::span<const std::uint32_t> leaves,
                                                DistanceKind kind);

/// Distance between two precomputed leaf rows under the model's forest.
double leaf_row_distance(const FittedModel& model, std::span<const std::uint32_t> a,
                         std::span<const std::uint32_t> b, DistanceKind kind);

}  // namespace fk
