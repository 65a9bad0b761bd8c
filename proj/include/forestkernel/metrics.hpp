#pragma once

#include <span>
#include <vector>

namespace fk {

double mse(std::span<const double> y, std::span<const double> yhat);

/// alpha*(y-q) when y >= q, else (1-alpha)*(q-y).
double pinball(double y, double q, double alpha);

/// Average pinball loss over all (observation, alpha) pairs. quantiles[i][j]
/// is the predicted alphas[j]-quantile for observation i.
double mean_pinball_grid(std::span<const double> y,
                         const std::vector<std::vector<double>>& quantiles,
                         std::span<const double> alphas);

}  // namespace fk
