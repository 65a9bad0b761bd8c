#pragma once

#include <span>
#include <vector>

#include "forestkernel/model.hpp"

namespace fk {

struct PredictionConfig {
  DistanceKind kind = DistanceKind::Breiman;
  double bandwidth = 0.2;
};

/// Gaussian kernel weights w_i proportional to exp[-(d_i/h)^2], normalized to
/// sum to 1. The exponent is stabilized by subtracting min(d^2)/h^2 so at
/// least one pre-normalization term equals 1 even for tiny h.
std::vector<double> kernel_weights(std::span<const double> distances, double h);

/// Distance-weighted conditional mean: sum_i w_i(x) Y_i.
double predict_mean(const FittedModel& model, std::span<const double> x,
                    const PredictionConfig& cfg);

/// Weighted empirical CDF at y: sum of weights of training responses <= y.
double weighted_cdf(const FittedModel& model, std::span<const double> x,
                    const PredictionConfig& cfg, double y);

/// Smallest training response whose cumulative weight reaches alpha.
double predict_quantile(const FittedModel& model, std::span<const double> x,
                        const PredictionConfig& cfg, double alpha);

/// Quantiles at the given levels reusing one weight vector. Matches
/// predict_quantile elementwise.
std::vector<double> predict_quantiles(const FittedModel& model, std::span<const double> x,
                                      const PredictionConfig& cfg,
                                      std::span<const double> alphas);

/// Row i, column j = predict_quantile(model, X_i, cfg, alphas[j]); weights
/// are computed once per query.
std::vector<std::vector<double>> predict_quantiles_batch(
    const FittedModel& model, const Dataset& queries, const PredictionConfig& cfg,
    std::span<const double> alphas, int threads = 0);

/// Quantile inversion over an explicit weight vector (weights aligned with
/// model.responses). Shared by the kernel predictors and the forest baseline.
std::vector<double> weighted_quantiles(const FittedModel& model,
                                       std::span<const double> weights,
                                       std::span<const double> alphas);

/// The 99-point evaluation grid alpha = 0.01, ..., 0.99.
std::vector<double> quantile_grid_99();

}  // namespace fk
