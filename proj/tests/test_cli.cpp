#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

#ifndef FK_CLI_PATH
#error "FK_CLI_PATH must point at the built CLI binary"
#endif

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FK_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> read_numeric_csv(const fs::path& p, bool header) {
  std::ifstream in(p);
  std::string line;
  if (header) std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

struct Workdir {
  fs::path dir;
  Workdir() {
    dir = fs::temp_directory_path() / ("fk_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Workdir() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("generate is deterministic and validates its arguments") {
  Workdir wd;
  const auto a = wd / "a.csv";
  const auto b = wd / "b.csv";
  CHECK(run_cli("generate --scenario friedman1 --n 50 --noise 2 --seed 9 --out " + a) == 0);
  CHECK(run_cli("generate --scenario friedman1 --n 50 --noise 2 --seed 9 --out " + b) == 0);
  CHECK(slurp(a) == slurp(b));

  std::ifstream in(a);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x1,x2,x3,x4,x5,x6,x7,y");

  CHECK(run_cli("generate --scenario friedman1 --n 0 --out " + (wd / "z.csv")) == 1);
  CHECK(run_cli("generate --scenario mystery --n 5 --out " + (wd / "z.csv")) == 1);
  CHECK(run_cli("generate --scenario linear --out " + (wd / "z.csv")) == 1);
}

TEST_CASE("fit, predict and quantile round-trip through the filesystem") {
  Workdir wd;
  const auto train = wd / "train.csv";
  const auto model = wd / "model.fkm";
  REQUIRE(run_cli("generate --scenario friedman1 --n 200 --seed 3 --out " + train) == 0);
  REQUIRE(run_cli("fit --data " + train + " --seed 4 --out-model " + model) == 0);

  const auto queries = wd / "queries.csv";
  REQUIRE(run_cli("generate --scenario friedman1 --n 30 --seed 5 --out " + queries) == 0);

  SUBCASE("a huge bandwidth washes out to the training mean") {
    const auto out = wd / "pred.csv";
    REQUIRE(run_cli("predict --model " + model + " --data " + queries +
                    " --method ranbu --bandwidth 1e6 --out " + out) == 0);
    const auto train_rows = read_numeric_csv(train, true);
    double mean = 0.0;
    for (const auto& row : train_rows) mean += row.back();
    mean /= static_cast<double>(train_rows.size());
    const auto rows = read_numeric_csv(out, true);
    REQUIRE(rows.size() == 30);
    for (const auto& row : rows) CHECK(row.back() == doctest::Approx(mean).epsilon(1e-9));
  }

  SUBCASE("both methods produce predictions for every query") {
    for (const std::string method : {"dino", "ranbu"}) {
      const auto out = wd / ("pred_" + method + ".csv");
      REQUIRE(run_cli("predict --model " + model + " --data " + queries + " --method " +
                      method + " --out " + out) == 0);
      CHECK(read_numeric_csv(out, true).size() == 30);
    }
  }

  SUBCASE("quantile emits one monotone column per level") {
    const auto out = wd / "quant.csv";
    REQUIRE(run_cli("quantile --model " + model + " --data " + queries +
                    " --alphas 0.1,0.5,0.9 --out " + out) == 0);
    const auto rows = read_numeric_csv(out, true);
    REQUIRE(rows.size() == 30);
    for (const auto& row : rows) {
      const std::size_t m = row.size();
      CHECK(row[m - 3] <= row[m - 2]);
      CHECK(row[m - 2] <= row[m - 1]);
    }
    CHECK(run_cli("quantile --model " + model + " --data " + queries +
                  " --alphas 0.5,1.5 --out " + out) == 1);
  }

  SUBCASE("usage and data errors are told apart") {
    CHECK(run_cli("predict --model " + model + " --data " + queries +
                  " --method euclid --out " + (wd / "x.csv")) == 1);
    CHECK(run_cli("predict --model " + (wd / "missing.fkm") + " --data " + queries +
                  " --out " + (wd / "x.csv")) == 2);
    CHECK(run_cli("predict --model " + model + " --out " + (wd / "x.csv")) == 1);
    CHECK(run_cli("frobnicate") == 1);
  }
}

TEST_CASE("dino rejects models trained without a depth cap") {
  Workdir wd;
  const auto train = wd / "train.csv";
  const auto model = wd / "deep.fkm";
  REQUIRE(run_cli("generate --scenario linear --n 80 --seed 7 --out " + train) == 0);
  REQUIRE(run_cli("fit --data " + train + " --trees 10 --max-depth -1 --out-model " +
                  model) == 0);
  const auto out = wd / "pred.csv";
  CHECK(run_cli("predict --model " + model + " --data " + train + " --method dino --out " +
                out) == 2);
  CHECK(run_cli("predict --model " + model + " --data " + train + " --method ranbu --out " +
                out) == 0);
}

TEST_CASE("depth-zero fits predict a constant") {
  Workdir wd;
  const auto train = wd / "train.csv";
  const auto model = wd / "stump.fkm";
  REQUIRE(run_cli("generate --scenario linear --n 60 --seed 2 --out " + train) == 0);
  REQUIRE(run_cli("fit --data " + train + " --trees 5 --max-depth 1 --out-model " + model +
                  " --no-bootstrap --min-node 60") == 0);
  const auto out = wd / "pred.csv";
  REQUIRE(run_cli("predict --model " + model + " --data " + train + " --out " + out) == 0);
  const auto rows = read_numeric_csv(out, true);
  REQUIRE(rows.size() == 60);
  for (const auto& row : rows) CHECK(row.back() == doctest::Approx(rows[0].back()));
}

TEST_CASE("distances exports a symmetric matrix with a zero diagonal") {
  Workdir wd;
  const auto train = wd / "train.csv";
  const auto model = wd / "model.fkm";
  const auto pts = wd / "pts.csv";
  REQUIRE(run_cli("generate --scenario rectangular --n 150 --seed 11 --out " + train) == 0);
  REQUIRE(run_cli("fit --data " + train + " --out-model " + model) == 0);
  REQUIRE(run_cli("generate --scenario rectangular --n 12 --seed 12 --out " + pts) == 0);

  for (const std::string kind : {"mrca", "breiman"}) {
    const auto out = wd / ("dist_" + kind + ".csv");
    REQUIRE(run_cli("distances --model " + model + " --data " + pts + " --kind " + kind +
                    " --out " + out) == 0);
    const auto m = read_numeric_csv(out, false);
    REQUIRE(m.size() == 12);
    for (std::size_t i = 0; i < 12; ++i) {
      REQUIRE(m[i].size() == 12);
      CHECK(m[i][i] == 0.0);
      for (std::size_t j = 0; j < 12; ++j) {
        CHECK(m[i][j] == m[j][i]);
        CHECK(m[i][j] >= 0.0);
        CHECK(m[i][j] <= 1.0);
      }
    }
  }
  CHECK(run_cli("distances --model " + model + " --data " + pts + " --kind euclid --out " +
                (wd / "x.csv")) == 1);
}

TEST_CASE("bench writes a JSON report with its CSV sidecar") {
  Workdir wd;
  const auto cfg = wd / "cfg.json";
  {
    std::ofstream out(cfg);
    out << R"({"scenario":"friedman1","n_train":60,"n_test":30,"replications":2,
              "methods":["ranbu","reduced_rf"],"master_seed":13,
              "reduced":{"trees":8,"max_depth":4}})";
  }
  const auto report = wd / "report.json";
  REQUIRE(run_cli("bench --config " + cfg + " --out " + report) == 0);
  CHECK(fs::exists(report));
  CHECK(fs::exists(wd / "report.csv"));
  CHECK(slurp(report).find("\"ratios\"") != std::string::npos);

  {
    std::ofstream out(cfg, std::ios::trunc);
    out << R"({"scenario":"friedman1","bogus_key":1})";
  }
  CHECK(run_cli("bench --config " + cfg + " --out " + report) == 1);
  CHECK(run_cli("bench --config " + (wd / "missing.json") + " --out " + report) == 2);
}
