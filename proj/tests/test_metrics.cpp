#include <doctest.h>

#include "forestkernel/metrics.hpp"
#include "forestkernel/predictor.hpp"

using namespace fk;

TEST_CASE("mse basics") {
  const std::vector<double> y = {1.0, 2.0, 3.0};
  CHECK(mse(y, y) == 0.0);
  const std::vector<double> yhat = {2.0, 2.0, 1.0};
  CHECK(mse(y, yhat) == doctest::Approx((1.0 + 0.0 + 4.0) / 3.0));
  CHECK_THROWS(mse(y, std::vector<double>{1.0}));
  CHECK_THROWS(mse(std::vector<double>{}, std::vector<double>{}));
}

TEST_CASE("pinball loss is the tilted absolute error") {
  // under-prediction penalized by alpha, over-prediction by 1 - alpha
  CHECK(pinball(10.0, 8.0, 0.9) == doctest::Approx(0.9 * 2.0));
  CHECK(pinball(10.0, 12.0, 0.9) == doctest::Approx(0.1 * 2.0));
  CHECK(pinball(3.0, 3.0, 0.5) == 0.0);
  CHECK(pinball(0.0, 4.0, 0.25) == doctest::Approx(3.0));
  CHECK_THROWS(pinball(1.0, 1.0, 0.0));
  CHECK_THROWS(pinball(1.0, 1.0, 1.0));
}

TEST_CASE("grid pinball of a constant unit offset averages to one half") {
  // y = 0, every quantile = 1: loss at alpha is (1 - alpha); averaged over a
  // symmetric grid this is exactly 0.5.
  const auto grid = quantile_grid_99();
  const std::vector<double> y = {0.0};
  const std::vector<std::vector<double>> q = {std::vector<double>(99, 1.0)};
  CHECK(mean_pinball_grid(y, q, grid) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("grid pinball averages over observations and levels") {
  const std::vector<double> alphas = {0.5};
  const std::vector<double> y = {0.0, 2.0};
  const std::vector<std::vector<double>> q = {{1.0}, {1.0}};
  // |err| = 1 at both points, alpha = 0.5 -> loss 0.5 each
  CHECK(mean_pinball_grid(y, q, alphas) == doctest::Approx(0.5));
  CHECK_THROWS(mean_pinball_grid(y, {{1.0}}, alphas));
}
