#include "forestkernel/metrics.hpp"

#include <stdexcept>

namespace fk {

double mse(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) throw std::invalid_argument("mse: length mismatch");
  if (y.empty()) throw std::invalid_argument("mse: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - yhat[i];
    total += d * d;
  }
  return total / static_cast<double>(y.size());
}

double pinball(double y, double q, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("pinball: alpha must be in (0,1)");
  return y >= q ? alpha * (y - q) : (1.0 - alpha) * (q - y);
}

double mean_pinball_grid(std::span<const double> y,
                         const std::vector<std::vector<double>>& quantiles,
                         std::span<const double> alphas) {
  if (quantiles.size() != y.size())
    throw std::invalid_argument("mean_pinball_grid: row count mismatch");
  if (y.empty() || alphas.empty())
    throw std::invalid_argument("mean_pinball_grid: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (quantiles[i].size() != alphas.size())
      throw std::invalid_argument("mean_pinball_grid: column count mismatch");
    for (std::size_t j = 0; j < alphas.size(); ++j)
      total += pinball(y[i], quantiles[i][j], alphas[j]);
  }
  return total / (static_cast<double>(y.size()) * static_cast<double>(alphas.size()));
}

}  // namespace fk
