#include "forestkernel/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "forestkernel/parallel.hpp"

namespace fk {

std::vector<double> kernel_weights(std::span<const double> distances, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("kernel_weights: h must be > 0");
  if (distances.empty()) throw std::invalid_argument("kernel_weights: empty distance vector");
  const double inv_h2 = 1.0 / (h * h);
  double min_sq = std::numeric_limits<double>::infinity();
  for (double d : distances) {
    if (!std::isfinite(d) || d < 0.0)
      throw std::invalid_argument("kernel_weights: distances must be finite and >= 0");
    min_sq = std::min(min_sq, d * d);
  }
  std::vector<double> w(distances.size());
  double total = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    w[i] = std::exp(-(distances[i] * distances[i] - min_sq) * inv_h2);
    total += w[i];
  }
  const double inv_total = 1.0 / total;
  for (double& v : w) v *= inv_total;
  return w;
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("quantile level alpha must be in (0,1)");
}

std::vector<double> weights_for_query(const FittedModel& model, std::span<const double> x,
                                      const PredictionConfig& cfg) {
  return kernel_weights(distance_vector(model, x, cfg.kind), cfg.bandwidth);
}

}  // namespace

double predict_mean(const FittedModel& model, std::span<const double> x,
                    const PredictionConfig& cfg) {
  auto w = weights_for_query(model, x, cfg);
  double out = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) out += w[i] * model.responses[i];
  return out;
}

double weighted_cdf(const FittedModel& model, std::span<const double> x,
                    const PredictionConfig& cfg, double y) {
  auto w = weights_for_query(model, x, cfg);
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (model.responses[i] <= y) total += w[i];
  return std::min(total, 1.0);
}

std::vector<double> weighted_quantiles(const FittedModel& model,
                                       std::span<const double> weights,
                                       std::span<const double> alphas) {
  const std::size_t n = model.train_count();
  if (weights.size() != n)
    throw std::invalid_argument("weighted_quantiles: weight length != n");
  for (double a : alphas) check_alpha(a);
  // cumulative weight in ascending response order; the alpha-quantile is the
  // first response where the running sum reaches alpha
  std::vector<double> prefix(n);
  double running = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    running += weights[model.response_order[k]];
    prefix[k] = running;
  }
  std::vector<double> out(alphas.size());
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    auto it = std::lower_bound(prefix.begin(), prefix.end(), alphas[j]);
    std::size_t k = it == prefix.end() ? n - 1
                                       : static_cast<std::size_t>(it - prefix.begin());
    out[j] = model.responses[model.response_order[k]];
  }
  return out;
}

double predict_quantile(const FittedModel& model, std::span<const double> x,
                        const PredictionConfig& cfg, double alpha) {
  check_alpha(alpha);
  auto w = weights_for_query(model, x, cfg);
  const double alphas[1] = {alpha};
  return weighted_quantiles(model, w, alphas)[0];
}

std::vector<double> predict_quantiles(const FittedModel& model, std::span<const double> x,
                                      const PredictionConfig& cfg,
                                      std::span<const double> alphas) {
  auto w = weights_for_query(model, x, cfg);
  return weighted_quantiles(model, w, alphas);
}

std::vector<std::vector<double>> predict_quantiles_batch(
    const FittedModel& model, const Dataset& queries, const PredictionConfig& cfg,
    std::span<const double> alphas, int threads) {
  for (double a : alphas) check_alpha(a);
  std::vector<std::vector<double>> out(queries.n_rows);
  parallel_for(queries.n_rows, threads, [&](std::size_t i) {
    out[i] = predict_quantiles(model, queries.row(i), cfg, alphas);
  });
  return out;
}

std::vector<double> quantile_grid_99() {
  std::vector<double> alphas(99);
  for (int k = 1; k <= 99; ++k) alphas[static_cast<std::size_t>(k - 1)] = k / 100.0;
  return alphas;
}

}  // namespace fk
