#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "forestkernel/data_synth.hpp"
#include "forestkernel/forest.hpp"

namespace fk {

enum class Method { DiNo, RanBu, ReducedRF, FullRF };

Method method_from_string(const std::string& name);
std::string to_string(Method m);

struct BenchConfig {
  ScenarioKind scenario = ScenarioKind::Friedman1;
  std::size_t n_train = 500;
  std::size_t n_test = 1000;
  std::size_t noise_count = 0;
  std::size_t replications = 50;
  std::vector<Method> methods = {Method::DiNo, Method::RanBu, Method::ReducedRF};
  double bandwidth = 0.2;
  std::uint64_t master_seed = 1;
  ForestParams reduced;                       // 50 trees, depth 5
  ForestParams full{.tree_count = 500, .max_depth = kUnlimitedDepth};
  bool compute_quantiles = true;              // pinball over the 99-point grid
  int threads = 0;

  void validate() const;
};

/// Loads a config from a JSON file; unknown keys are an error listing them.
BenchConfig load_bench_config(const std::string& path);

struct Moments {
  double mean = 0.0;
  double se = 0.0;  // sample std / sqrt(replications)
};

struct MethodResult {
  Moments mse;
  Moments pinball;
  Moments time_s;
  std::vector<double> mse_values;      // per replication
  std::vector<double> pinball_values;
  std::vector<double> time_values;
};

struct BenchReport {
  BenchConfig config;
  std::map<std::string, MethodResult> per_method;
  // ratios.at(kind).at(A).at(B) = mean(kind, A) / mean(kind, B),
  // kind in {"loss", "pinball", "time"}
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> ratios;
};

/// Runs the replication protocol: per replication, fresh train/test splits
/// from seeds derived off (master_seed, replication); all methods share the
/// same splits. Timing covers fit plus one prediction, nothing else.
BenchReport run_bench(const BenchConfig& cfg);

/// Writes the versioned JSON report plus a long-format CSV sidecar
/// (method,replication,metric,value). With strip_timing, all timing fields
/// are zeroed so reports from identical configs are byte-identical.
void emit_report(const BenchReport& report, const std::string& json_path,
                 const std::string& csv_path, bool strip_timing = false);

BenchReport parse_report(const std::string& json_path);

bool reports_equal(const BenchReport& a, const BenchReport& b);

}  // namespace fk
