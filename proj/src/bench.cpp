#include "forestkernel/bench.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "forestkernel/metrics.hpp"
#include "forestkernel/model.hpp"
#include "forestkernel/parallel.hpp"
#include "forestkernel/predictor.hpp"
#include "forestkernel/rng.hpp"

namespace fk {

using json = nlohmann::ordered_json;

Method method_from_string(const std::string& name) {
  if (name == "DiNo" || name == "dino") return Method::DiNo;
  if (name == "RanBu" || name == "ranbu") return Method::RanBu;
  if (name == "ReducedRF" || name == "reduced_rf") return Method::ReducedRF;
  if (name == "FullRF" || name == "full_rf") return Method::FullRF;
  throw std::invalid_argument("unknown method '" + name +
                              "' (expected DiNo|RanBu|ReducedRF|FullRF)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::DiNo: return "DiNo";
    case Method::RanBu: return "RanBu";
    case Method::ReducedRF: return "ReducedRF";
    case Method::FullRF: return "FullRF";
  }
  throw std::logic_error("bad Method");
}

void BenchConfig::validate() const {
  if (replications < 1) throw std::invalid_argument("bench: replications must be >= 1");
  if (methods.empty()) throw std::invalid_argument("bench: methods must be non-empty");
  if (n_train < 1 || n_test < 1) throw std::invalid_argument("bench: n_train/n_test must be >= 1");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bench: bandwidth must be > 0");
  reduced.validate();
  full.validate();
  for (Method m : methods)
    if (m == Method::DiNo && reduced.unlimited_depth())
      throw std::invalid_argument("bench: DiNo requires a finite max depth");
}

namespace {

// QRF-style weights for the plain forest baselines: per tree, a training row
// sharing the query leaf gets 1/(leaf occupancy); averaged over trees.
std::vector<double> forest_cooccurrence_weights(
    const FittedModel& model, std::span<const std::uint32_t> query_leaves,
    const std::vector<std::vector<std::uint32_t>>& leaf_occupancy) {
  const std::size_t n = model.train_count();
  const std::size_t B = model.leaf_matrix.n_trees;
  std::vector<double> w(n, 0.0);
  const std::uint32_t* lm = model.leaf_matrix.entries.data();
  for (std::size_t b = 0; b < B; ++b) {
    const std::uint32_t target = query_leaves[b];
    const double contrib = 1.0 / static_cast<double>(leaf_occupancy[b][target]);
    for (std::size_t i = 0; i < n; ++i)
      if (lm[i * B + b] == target) w[i] += contrib;
  }
  const double inv_b = 1.0 / static_cast<double>(B);
  for (double& v : w) v *= inv_b;
  return w;
}

std::vector<std::vector<std::uint32_t>> count_leaf_occupancy(const FittedModel& model) {
  const std::size_t B = model.leaf_matrix.n_trees;
  std::vector<std::vector<std::uint32_t>> counts(B);
  for (std::size_t b = 0; b < B; ++b)
    counts[b].assign(static_cast<std::size_t>(model.forest.trees[b].leaf_count), 0);
  const std::uint32_t* lm = model.leaf_matrix.entries.data();
  for (std::size_t i = 0; i < model.train_count(); ++i)
    for (std::size_t b = 0; b < B; ++b) ++counts[b][lm[i * B + b]];
  return counts;
}

struct RepOutcome {
  double mse = 0.0;
  double pinball = 0.0;
  double time_s = 0.0;
};

RepOutcome evaluate_method(Method method, const BenchConfig& cfg, const Dataset& train,
                           const Dataset& test, std::uint64_t forest_seed) {
  const ForestParams& params = method == Method::FullRF ? cfg.full : cfg.reduced;
  const bool kernel_method = method == Method::DiNo || method == Method::RanBu;
  PredictionConfig pred_cfg{
      method == Method::DiNo ? DistanceKind::Mrca : DistanceKind::Breiman,
      cfg.bandwidth};

  // timed: training plus one out-of-sample prediction
  const auto t0 = std::chrono::steady_clock::now();
  FittedModel model = fit_model(train, params, forest_seed, cfg.bandwidth, cfg.threads);
  volatile double sink = kernel_method
                             ? predict_mean(model, test.row(0), pred_cfg)
                             : predict_forest_mean(model.forest, test.row(0));
  (void)sink;
  const auto t1 = std::chrono::steady_clock::now();

  RepOutcome out;
  out.time_s = std::chrono::duration<double>(t1 - t0).count();

  std::vector<double> yhat(test.n_rows);
  const auto alphas = quantile_grid_99();
  std::vector<std::vector<double>> quantiles(cfg.compute_quantiles ? test.n_rows : 0);
  std::vector<std::vector<std::uint32_t>> occupancy;
  if (!kernel_method && cfg.compute_quantiles) occupancy = count_leaf_occupancy(model);

  parallel_for(test.n_rows, cfg.threads, [&](std::size_t i) {
    if (kernel_method) {
      auto w = kernel_weights(distance_vector(model, test.row(i), pred_cfg.kind),
                              pred_cfg.bandwidth);
      double mean = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) mean += w[k] * model.responses[k];
      yhat[i] = mean;
      if (cfg.compute_quantiles) quantiles[i] = weighted_quantiles(model, w, alphas);
    } else {
      yhat[i] = predict_forest_mean(model.forest, test.row(i));
      if (cfg.compute_quantiles) {
        auto leaves = leaf_row(model.forest, test.row(i));
        auto w = forest_cooccurrence_weights(model, leaves, occupancy);
        quantiles[i] = weighted_quantiles(model, w, alphas);
      }
    }
  });

  out.mse = mse(test.responses, yhat);
  if (cfg.compute_quantiles)
    out.pinball = mean_pinball_grid(test.responses, quantiles, alphas);
  return out;
}

Moments summarize(const std::vector<double>& values) {
  Moments m;
  const auto n = static_cast<double>(values.size());
  for (double v : values) m.mean += v;
  m.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return m;
}

}  // namespace

BenchReport run_bench(const BenchConfig& cfg) {
  cfg.validate();
  BenchReport report;
  report.config = cfg;
  for (Method m : cfg.methods) report.per_method[to_string(m)] = MethodResult{};

  for (std::size_t r = 0; r < cfg.replications; ++r) {
    // seed derivation contract: (train, test, forest) = derive(master, 3r + {0,1,2})
    const std::uint64_t train_seed = derive_seed(cfg.master_seed, 3 * r);
    const std::uint64_t test_seed = derive_seed(cfg.master_seed, 3 * r + 1);
    const std::uint64_t forest_seed = derive_seed(cfg.master_seed, 3 * r + 2);
    const Dataset train = generate(cfg.scenario, cfg.n_train, cfg.noise_count, train_seed);
    const Dataset test = generate(cfg.scenario, cfg.n_test, cfg.noise_count, test_seed);

    for (Method m : cfg.methods) {
      RepOutcome outcome = evaluate_method(m, cfg, train, test, forest_seed);
      MethodResult& res = report.per_method[to_string(m)];
      res.mse_values.push_back(outcome.mse);
      res.pinball_values.push_back(outcome.pinball);
      res.time_values.push_back(outcome.time_s);
    }
  }

  for (auto& [name, res] : report.per_method) {
    res.mse = summarize(res.mse_values);
    res.pinball = summarize(res.pinball_values);
    res.time_s = summarize(res.time_values);
  }

  auto ratio_table = [&](auto value_of) {
    std::map<std::string, std::map<std::string, double>> table;
    for (const auto& [a, ra] : report.per_method)
      for (const auto& [b, rb] : report.per_method)
        table[a][b] = value_of(ra) / value_of(rb);
    return table;
  };
  report.ratios["loss"] = ratio_table([](const MethodResult& r) { return r.mse.mean; });
  report.ratios["pinball"] =
      ratio_table([](const MethodResult& r) { return r.pinball.mean; });
  report.ratios["time"] = ratio_table([](const MethodResult& r) { return r.time_s.mean; });
  return report;
}

namespace {

json config_to_json(const BenchConfig& cfg) {
  json methods = json::array();
  for (Method m : cfg.methods) methods.push_back(to_string(m));
  auto params_to_json = [](const ForestParams& p) {
    return json{{"trees", p.tree_count},
                {"max_depth", p.max_depth},
                {"mtry", p.mtry},
                {"min_node_size", p.min_node_size},
                {"bootstrap", p.bootstrap}};
  };
  return json{{"scenario", to_string(cfg.scenario)},
              {"n_train", cfg.n_train},
              {"n_test", cfg.n_test},
              {"noise_count", cfg.noise_count},
              {"replications", cfg.replications},
              {"methods", methods},
              {"bandwidth", cfg.bandwidth},
              {"master_seed", cfg.master_seed},
              {"reduced", params_to_json(cfg.reduced)},
              {"full", params_to_json(cfg.full)},
              {"compute_quantiles", cfg.compute_quantiles}};
}

ForestParams params_from_json(const json& j, const ForestParams& defaults,
                              const std::string& where) {
  ForestParams p = defaults;
  for (const auto& [key, value] : j.items()) {
    if (key == "trees") p.tree_count = value.get<int>();
    else if (key == "max_depth") p.max_depth = value.get<int>();
    else if (key == "mtry") p.mtry = value.get<int>();
    else if (key == "min_node_size") p.min_node_size = value.get<int>();
    else if (key == "bootstrap") p.bootstrap = value.get<bool>();
    else throw std::invalid_argument("bench config: unknown key '" + where + "." + key + "'");
  }
  return p;
}

BenchConfig config_from_json(const json& j) {
  BenchConfig cfg;
  std::vector<std::string> unknown;
  for (const auto& [key, value] : j.items()) {
    if (key == "scenario") cfg.scenario = scenario_from_string(value.get<std::string>());
    else if (key == "n_train") cfg.n_train = value.get<std::size_t>();
    else if (key == "n_test") cfg.n_test = value.get<std::size_t>();
    else if (key == "noise_count") cfg.noise_count = value.get<std::size_t>();
    else if (key == "replications") cfg.replications = value.get<std::size_t>();
    else if (key == "bandwidth") cfg.bandwidth = value.get<double>();
    else if (key == "master_seed") cfg.master_seed = value.get<std::uint64_t>();
    else if (key == "compute_quantiles") cfg.compute_quantiles = value.get<bool>();
    else if (key == "threads") cfg.threads = value.get<int>();
    else if (key == "reduced") cfg.reduced = params_from_json(value, cfg.reduced, "reduced");
    else if (key == "full") cfg.full = params_from_json(value, cfg.full, "full");
    else if (key == "methods") {
      cfg.methods.clear();
      for (const auto& name : value) cfg.methods.push_back(method_from_string(name.get<std::string>()));
    } else {
      unknown.push_back(key);
    }
  }
  if (!unknown.empty()) {
    std::string msg = "bench config: unknown keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw std::invalid_argument(msg);
  }
  cfg.validate();
  return cfg;
}

json moments_to_json(const Moments& m) { return json{{"mean", m.mean}, {"se", m.se}}; }

Moments moments_from_json(const json& j) {
  return Moments{j.at("mean").get<double>(), j.at("se").get<double>()};
}

}  // namespace

BenchConfig load_bench_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("bench config: cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("bench config: parse error: " + std::string(e.what()));
  }
  return config_from_json(j);
}

void emit_report(const BenchReport& report, const std::string& json_path,
                 const std::string& csv_path, bool strip_timing) {
  json out;
  out["schema_version"] = 1;
  out["config"] = config_to_json(report.config);
  json methods = json::object();
  for (const auto& [name, res] : report.per_method) {
    json m;
    m["mse"] = moments_to_json(res.mse);
    m["pinball"] = moments_to_json(res.pinball);
    m["time_s"] = strip_timing ? moments_to_json(Moments{}) : moments_to_json(res.time_s);
    m["mse_values"] = res.mse_values;
    m["pinball_values"] = res.pinball_values;
    m["time_values"] =
        strip_timing ? std::vector<double>(res.time_values.size(), 0.0) : res.time_values;
    methods[name] = m;
  }
  out["per_method"] = methods;
  json ratios = json::object();
  for (const auto& [kind, table] : report.ratios) {
    if (strip_timing && kind == "time") {
      json zeroed = json::object();
      for (const auto& [a, row] : table) {
        zeroed[a] = json::object();
        for (const auto& [b, _] : row) zeroed[a][b] = 0.0;
      }
      ratios[kind] = zeroed;
      continue;
    }
    ratios[kind] = table;
  }
  out["ratios"] = ratios;

  std::ofstream jf(json_path, std::ios::binary);
  if (!jf) throw std::runtime_error("emit_report: cannot open " + json_path);
  jf << out.dump(2) << "\n";
  if (!jf) throw std::runtime_error("emit_report: write failed for " + json_path);

  std::ofstream cf(csv_path, std::ios::binary);
  if (!cf) throw std::runtime_error("emit_report: cannot open " + csv_path);
  cf << "method,replication,metric,value\n";
  for (const auto& [name, res] : report.per_method) {
    for (std::size_t r = 0; r < res.mse_values.size(); ++r) {
      cf << name << "," << r << ",mse," << res.mse_values[r] << "\n";
      cf << name << "," << r << ",mean_pinball," << res.pinball_values[r] << "\n";
      cf << name << "," << r << ",time_s,"
         << (strip_timing ? 0.0 : res.time_values[r]) << "\n";
    }
  }
  if (!cf) throw std::runtime_error("emit_report: write failed for " + csv_path);
}

BenchReport parse_report(const std::string& json_path) {
  std::ifstream f(json_path);
  if (!f) throw std::runtime_error("parse_report: cannot open " + json_path);
  json j;
  f >> j;
  if (j.at("schema_version").get<int>() != 1)
    throw std::runtime_error("parse_report: unsupported schema version");
  BenchReport report;
  report.config = config_from_json(j.at("config"));
  for (const auto& [name, m] : j.at("per_method").items()) {
    MethodResult res;
    res.mse = moments_from_json(m.at("mse"));
    res.pinball = moments_from_json(m.at("pinball"));
    res.time_s = moments_from_json(m.at("time_s"));
    res.mse_values = m.at("mse_values").get<std::vector<double>>();
    res.pinball_values = m.at("pinball_values").get<std::vector<double>>();
    res.time_values = m.at("time_values").get<std::vector<double>>();
    report.per_method[name] = res;
  }
  for (const auto& [kind, table] : j.at("ratios").items())
    for (const auto& [a, row] : table.items())
      for (const auto& [b, v] : row.items())
        report.ratios[kind][a][b] = v.get<double>();
  return report;
}

bool reports_equal(const BenchReport& a, const BenchReport& b) {
  if (a.per_method.size() != b.per_method.size()) return false;
  for (const auto& [name, ra] : a.per_method) {
    auto it = b.per_method.find(name);
    if (it == b.per_method.end()) return false;
    const MethodResult& rb = it->second;
    if (ra.mse.mean != rb.mse.mean || ra.mse.se != rb.mse.se) return false;
    if (ra.pinball.mean != rb.pinball.mean || ra.pinball.se != rb.pinball.se) return false;
    if (ra.time_s.mean != rb.time_s.mean || ra.time_s.se != rb.time_s.se) return false;
    if (ra.mse_values != rb.mse_values || ra.pinball_values != rb.pinball_values ||
        ra.time_values != rb.time_values)
      return false;
  }
  return a.ratios == b.ratios;
}

}  // namespace fk
