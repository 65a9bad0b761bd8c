#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "forestkernel/dataset.hpp"

namespace fk {

enum class ScenarioKind { Rectangular, Friedman1, Linear };

ScenarioKind scenario_from_string(const std::string& name);
std::string to_string(ScenarioKind kind);

/// Number of informative covariates the scenario's mean function reads.
std::size_t scenario_informative_count(ScenarioKind kind);

/// Noiseless E[Y|x] for the scenario. Coordinates beyond the informative
/// ones are ignored; too few coordinates is a dimension error.
double scenario_mean(ScenarioKind kind, std::span<const double> x);

/// Draws a deterministic synthetic dataset: informative covariates per the
/// scenario's design, `noise_count` appended irrelevant columns, and
/// response = scenario_mean(x) + N(0,1) noise.
///
/// Draw order is part of the format contract: rows are generated in order,
/// and within a row the draws are informative coordinates left to right
/// (Rectangular: Bernoulli then uniform per coordinate), then noise columns
/// left to right, then the response noise.
Dataset generate(ScenarioKind kind, std::size_t n, std::size_t noise_count,
                 std::uint64_t seed);

}  // namespace fk
