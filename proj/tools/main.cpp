#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "forestkernel/bench.hpp"
#include "forestkernel/data_synth.hpp"
#include "forestkernel/dataset.hpp"
#include "forestkernel/metrics.hpp"
#include "forestkernel/model.hpp"
#include "forestkernel/model_io.hpp"
#include "forestkernel/predictor.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_alphas(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("bad alpha value '" + item + "'");
    }
    if (!(out.back() > 0.0 && out.back() < 1.0))
      throw UsageError("alpha values must be in (0,1)");
  }
  if (out.empty()) throw UsageError("--alphas must list at least one level");
  return out;
}

void append_double(std::string& out, double v) {
  char buf[40];
  int len = std::snprintf(buf, sizeof(buf), "%.17g", v);
  out.append(buf, static_cast<std::size_t>(len));
}

void append_double9(std::string& out, double v) {
  char buf[32];
  int len = std::snprintf(buf, sizeof(buf), "%.9g", v);
  out.append(buf, static_cast<std::size_t>(len));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("write failed for " + path);
}

// Echoes the input CSV and appends prediction columns.
void write_augmented_csv(const fk::Dataset& data, const std::string& target_name,
                         const std::vector<std::string>& extra_names,
                         const std::vector<std::vector<double>>& extra_cols,
                         const std::string& path) {
  std::string out;
  for (std::size_t j = 0; j < data.n_cols; ++j) out += "x" + std::to_string(j + 1) + ",";
  if (!data.responses.empty()) out += target_name + ",";
  for (std::size_t k = 0; k < extra_names.size(); ++k) {
    out += extra_names[k];
    out += (k + 1 < extra_names.size()) ? ',' : '\n';
  }
  for (std::size_t i = 0; i < data.n_rows; ++i) {
    for (double v : data.row(i)) {
      append_double(out, v);
      out += ',';
    }
    if (!data.responses.empty()) {
      append_double(out, data.responses[i]);
      out += ',';
    }
    for (std::size_t k = 0; k < extra_cols.size(); ++k) {
      append_double(out, extra_cols[k][i]);
      out += (k + 1 < extra_cols.size()) ? ',' : '\n';
    }
  }
  write_text(path, out);
}

int run(int argc, char** argv) {
  CLI::App app{"Shallow-forest kernel regression toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (0 = auto, 1 = serial)");

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic scenario dataset");
  std::string gen_scenario = "friedman1", gen_out;
  std::size_t gen_n = 0, gen_noise = 0;
  std::uint64_t gen_seed = 1;
  gen->add_option("--scenario", gen_scenario, "rectangular|friedman1|linear")->required();
  gen->add_option("--n", gen_n, "Number of rows")->required();
  gen->add_option("--noise", gen_noise, "Number of irrelevant noise columns");
  gen->add_option("--seed", gen_seed, "Master seed");
  gen->add_option("--out", gen_out, "Output CSV path")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Train a model and save the archive");
  std::string fit_data, fit_model_path, fit_target = "y";
  fk::ForestParams fit_params;
  double fit_bandwidth = 0.2;
  std::uint64_t fit_seed = 1;
  fit->add_option("--data", fit_data, "Training CSV")->required();
  fit->add_option("--trees", fit_params.tree_count, "Number of trees (default 50)");
  fit->add_option("--max-depth", fit_params.max_depth,
                  "Maximum depth (default 5; -1 = unlimited)");
  fit->add_option("--mtry", fit_params.mtry, "Features tried per split (0 = p/3)");
  fit->add_option("--min-node", fit_params.min_node_size, "Minimum node size (default 5)");
  fit->add_option("--seed", fit_seed, "Master seed");
  fit->add_option("--bandwidth", fit_bandwidth, "Default kernel bandwidth (default 0.2)");
  fit->add_option("--target", fit_target, "Response column name (default y)");
  bool fit_no_bootstrap = false;
  fit->add_flag("--no-bootstrap", fit_no_bootstrap, "Train each tree on the full sample");
  fit->add_option("--out-model", fit_model_path, "Output model path")->required();

  // predict / quantile
  auto* predict = app.add_subcommand("predict", "Kernel-weighted mean predictions");
  auto* quantile = app.add_subcommand("quantile", "Kernel-weighted quantile predictions");
  struct PredictArgs {
    std::string model, data, method = "ranbu", out, target = "y", alphas = "0.1,0.5,0.9";
    double bandwidth = 0.0;  // 0 = model default
  } pa, qa;
  for (auto [cmd, args] : {std::pair{predict, &pa}, std::pair{quantile, &qa}}) {
    cmd->add_option("--model", args->model, "Model archive path")->required();
    cmd->add_option("--data", args->data, "Query CSV")->required();
    cmd->add_option("--method", args->method, "dino|ranbu (default ranbu)");
    cmd->add_option("--bandwidth", args->bandwidth, "Bandwidth override (default: model's)");
    cmd->add_option("--target", args->target, "Response column name to pass through");
    cmd->add_option("--out", args->out, "Output CSV path")->required();
  }
  quantile->add_option("--alphas", qa.alphas, "Comma-separated levels in (0,1)");

  // distances
  auto* dist = app.add_subcommand("distances", "Pairwise distance matrix export");
  std::string dist_model, dist_data, dist_kind = "mrca", dist_out, dist_target = "y";
  dist->add_option("--model", dist_model, "Model archive path")->required();
  dist->add_option("--data", dist_data, "CSV of points")->required();
  dist->add_option("--kind", dist_kind, "mrca|breiman (default mrca)");
  dist->add_option("--target", dist_target, "Response column name to ignore");
  dist->add_option("--out", dist_out, "Output CSV path")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "Run the replication benchmark");
  std::string bench_config, bench_out = "bench_report.json";
  bench->add_option("--config", bench_config, "JSON benchmark config")->required();
  bench->add_option("--out", bench_out, "Report JSON path (CSV sidecar alongside)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*gen) {
      fk::ScenarioKind kind;
      try {
        kind = fk::scenario_from_string(gen_scenario);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      if (gen_n == 0) throw UsageError("--n must be >= 1");
      fk::write_csv(fk::generate(kind, gen_n, gen_noise, gen_seed), gen_out);
      return kExitOk;
    }

    if (*fit) {
      if (fit_no_bootstrap) fit_params.bootstrap = false;
      try {
        fit_params.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      fk::Dataset data = fk::read_csv(fit_data, fit_target);
      if (data.responses.empty())
        throw std::runtime_error("training data has no '" + fit_target + "' column");
      const auto t0 = std::chrono::steady_clock::now();
      fk::FittedModel model = fk::fit_model(data, fit_params, fit_seed, fit_bandwidth, threads);
      const auto t1 = std::chrono::steady_clock::now();
      fk::save_model(model, fit_model_path);
      std::printf("trained %d trees on %zu x %zu in %.6f s\n", fit_params.tree_count,
                  data.n_rows, data.n_cols, std::chrono::duration<double>(t1 - t0).count());
      return kExitOk;
    }

    if (*predict || *quantile) {
      const PredictArgs& args = *predict ? pa : qa;
      fk::DistanceKind kind;
      try {
        kind = fk::distance_kind_from_string(args.method);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      fk::FittedModel model = fk::load_model(args.model);
      fk::Dataset data = fk::read_csv(args.data, args.target);
      fk::PredictionConfig cfg{kind, args.bandwidth > 0.0 ? args.bandwidth
                                                          : model.default_bandwidth};
      if (*predict) {
        std::vector<double> yhat(data.n_rows);
        for (std::size_t i = 0; i < data.n_rows; ++i)
          yhat[i] = fk::predict_mean(model, data.row(i), cfg);
        write_augmented_csv(data, args.target, {"prediction"}, {yhat}, args.out);
      } else {
        std::vector<double> alphas = parse_alphas(args.alphas);
        auto rows = fk::predict_quantiles_batch(model, data, cfg, alphas, threads);
        std::vector<std::string> names;
        std::vector<std::vector<double>> cols(alphas.size(),
                                              std::vector<double>(data.n_rows));
        for (std::size_t j = 0; j < alphas.size(); ++j) {
          std::string label = std::to_string(alphas[j]);
          label.erase(label.find_last_not_of('0') + 1);
          if (label.back() == '.') label.pop_back();
          names.push_back("q_" + label);
          for (std::size_t i = 0; i < data.n_rows; ++i) cols[j][i] = rows[i][j];
        }
        write_augmented_csv(data, args.target, names, cols, args.out);
      }
      return kExitOk;
    }

    if (*dist) {
      fk::DistanceKind kind;
      try {
        kind = fk::distance_kind_from_string(dist_kind);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      fk::FittedModel model = fk::load_model(dist_model);
      fk::Dataset data = fk::read_csv(dist_data, dist_target);
      std::vector<std::vector<std::uint32_t>> leaves(data.n_rows);
      for (std::size_t i = 0; i < data.n_rows; ++i)
        leaves[i] = fk::leaf_row(model.forest, data.row(i));
      std::string out;
      for (std::size_t i = 0; i < data.n_rows; ++i) {
        for (std::size_t j = 0; j < data.n_rows; ++j) {
          double d = i == j ? 0.0
                            : fk::leaf_row_distance(model, leaves[i], leaves[j], kind);
          append_double9(out, d);
          out += (j + 1 < data.n_rows) ? ',' : '\n';
        }
      }
      write_text(dist_out, out);
      return kExitOk;
    }

    if (*bench) {
      fk::BenchConfig cfg;
      try {
        cfg = fk::load_bench_config(bench_config);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      if (threads > 0) cfg.threads = threads;
      fk::BenchReport report = fk::run_bench(cfg);
      std::string csv_path = bench_out;
      if (auto pos = csv_path.rfind(".json"); pos != std::string::npos)
        csv_path = csv_path.substr(0, pos);
      csv_path += ".csv";
      fk::emit_report(report, bench_out, csv_path);
      std::printf("report written to %s and %s\n", bench_out.c_str(), csv_path.c_str());
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
