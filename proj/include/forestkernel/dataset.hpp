#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fk {

/// A feature matrix plus response vector; the unit of training and evaluation.
/// Features are stored row-major. `informative_count` and `noise_count` are
/// metadata set by the synthetic generators (columns are appended:
/// informative first, then noise).
struct Dataset {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> features;  // n_rows * n_cols, row-major
  std::vector<double> responses;
  std::size_t informative_count = 0;
  std::size_t noise_count = 0;

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * n_cols, n_cols};
  }
  double* row_ptr(std::size_t i) { return features.data() + i * n_cols; }

  /// Throws if shapes are inconsistent or any entry is non-finite.
  void validate() const;
};

/// Writes header `x1,...,xp,y` and one row per observation. Values use
/// shortest round-trip decimal formatting, LF line endings.
void write_csv(const Dataset& data, const std::string& path);

/// Reads a CSV with a header row. The column named `target` becomes the
/// response; all other columns are features in file order. If no column
/// matches `target`, responses are left empty (feature-only file).
Dataset read_csv(const std::string& path, const std::string& target = "y");

}  // namespace fk
