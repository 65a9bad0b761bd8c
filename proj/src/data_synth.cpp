#include "forestkernel/data_synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "forestkernel/rng.hpp"

namespace fk {

ScenarioKind scenario_from_string(const std::string& name) {
  if (name == "rectangular") return ScenarioKind::Rectangular;
  if (name == "friedman1") return ScenarioKind::Friedman1;
  if (name == "linear") return ScenarioKind::Linear;
  throw std::invalid_argument("unknown scenario '" + name +
                              "' (expected rectangular|friedman1|linear)");
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Rectangular: return "rectangular";
    case ScenarioKind::Friedman1: return "friedman1";
    case ScenarioKind::Linear: return "linear";
  }
  throw std::logic_error("bad ScenarioKind");
}

std::size_t scenario_informative_count(ScenarioKind kind) {
  return kind == ScenarioKind::Rectangular ? 4 : 5;
}

double scenario_mean(ScenarioKind kind, std::span<const double> x) {
  if (x.size() < scenario_informative_count(kind))
    throw std::invalid_argument("scenario_mean: need at least " +
                                std::to_string(scenario_informative_count(kind)) +
                                " coordinates, got " + std::to_string(x.size()));
  switch (kind) {
    case ScenarioKind::Rectangular:
      return -2.5 * x[0] - 2.0 * x[1] + 3.0 * x[2] - 4.0 * x[3];
    case ScenarioKind::Friedman1:
      return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) +
             20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4];
    case ScenarioKind::Linear:
      return 1.0 * x[0] + 3.0 * x[1] - 1.5 * x[2] - 2.0 * x[3] + 0.7 * x[4];
  }
  throw std::logic_error("bad ScenarioKind");
}

Dataset generate(ScenarioKind kind, std::size_t n, std::size_t noise_count,
                 std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("generate: n must be >= 1");
  const std::size_t informative = scenario_informative_count(kind);
  const std::size_t p = informative + noise_count;

  Dataset data;
  data.n_rows = n;
  data.n_cols = p;
  data.informative_count = informative;
  data.noise_count = noise_count;
  data.features.resize(n * p);
  data.responses.resize(n);

  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = data.row_ptr(i);
    for (std::size_t j = 0; j < informative; ++j) {
      switch (kind) {
        case ScenarioKind::Rectangular: {
          // covariate lands in (0,5) or (5,10) per an independent fair coin
          bool upper = rng.next_u64() >> 63;
          row[j] = upper ? rng.uniform_open(5.0, 10.0) : rng.uniform_open(0.0, 5.0);
          break;
        }
        case ScenarioKind::Friedman1:
          row[j] = rng.uniform01();
          break;
        case ScenarioKind::Linear:
          row[j] = rng.normal();
          break;
      }
    }
    for (std::size_t j = informative; j < p; ++j) {
      switch (kind) {
        case ScenarioKind::Rectangular: row[j] = 10.0 * rng.uniform01(); break;
        case ScenarioKind::Friedman1: row[j] = rng.uniform01(); break;
        case ScenarioKind::Linear: row[j] = rng.normal(); break;
      }
    }
    data.responses[i] = scenario_mean(kind, data.row(i)) + rng.normal();
  }
  return data;
}

}  // namespace fk
