#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "json.hpp"

#include "cplearn/cp_model.hpp"
#include "cplearn/data.hpp"
#include "cplearn/training.hpp"

using namespace cplearn;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* env = std::getenv("CPLEARN_CLI");
  REQUIRE_MESSAGE(env != nullptr, "CPLEARN_CLI must point at the cplearn binary");
  return env;
}

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("cplearn_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string p(const std::string& name) const { return (dir / name).string(); }
};

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const Scratch& s, const std::string& args) {
  const std::string out_file = s.p("stdout.txt");
  const std::string err_file = s.p("stderr.txt");
  const std::string cmd =
      cli_path() + " " + args + " >" + out_file + " 2>" + err_file;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  auto slurp = [](const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

std::string slurp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n' ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("train writes model, prep, and a report with one row per epoch") {
  Scratch s;
  REQUIRE(run_cli(s, "gen-synthetic --out " + s.p("d.csv") + " --samples 200 --seed 5")
              .exit_code == 0);
  const RunResult r = run_cli(
      s, "train --data " + s.p("d.csv") + " --map poly --local-dim 3 --rank 7 "
         "--init linear --epochs 4 --seed 5 --out " + s.p("m.json"));
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(s.p("m.json")));
  CHECK(fs::exists(s.p("m.json.prep.json")));
  REQUIRE(fs::exists(s.p("m.json.report.csv")));
  CHECK(count_lines(slurp_file(s.p("m.json.report.csv"))) == 5);  // header + 4 epochs
}

TEST_CASE("bad data path fails with the path in the message") {
  Scratch s;
  const RunResult r = run_cli(
      s, "train --data " + s.p("nope.csv") + " --out " + s.p("m.json"));
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("nope.csv") != std::string::npos);
  CHECK(r.err.rfind("error[", 0) == 0);  // machine-parsable prefix
}

TEST_CASE("unknown flag is a usage error") {
  Scratch s;
  const RunResult r = run_cli(s, "train --frobnicate");
  CHECK(r.exit_code == 1);
  CHECK(r.err.rfind("error[usage]", 0) == 0);
}

TEST_CASE("zero epochs serializes the untouched initial model") {
  Scratch s;
  REQUIRE(run_cli(s, "gen-synthetic --out " + s.p("d.csv") + " --samples 100 --seed 9")
              .exit_code == 0);
  REQUIRE(run_cli(s, "train --data " + s.p("d.csv") + " --map poly --local-dim 3 "
                     "--rank 4 --init random --sigma 0.2 --epochs 0 --seed 9 --out " +
                         s.p("m.json"))
              .exit_code == 0);

  // Random init depends only on (map spec, rank, sigma, seed).
  const CpModel expect =
      init_random(FeatureMapSpec::polynomial(7, 3), 4, 0.2, 9);
  CHECK(slurp_file(s.p("m.json")) == save_model(expect) + "\n");
}

TEST_CASE("identical config and seed give byte-identical model files") {
  Scratch s;
  REQUIRE(run_cli(s, "gen-synthetic --out " + s.p("d.csv") + " --samples 150 --seed 11")
              .exit_code == 0);
  const std::string train_cmd =
      "train --data " + s.p("d.csv") + " --map poly --local-dim 2 --rank 3 "
      "--epochs 3 --seed 11 --out ";
  REQUIRE(run_cli(s, train_cmd + s.p("a.json")).exit_code == 0);
  REQUIRE(run_cli(s, train_cmd + s.p("b.json")).exit_code == 0);
  CHECK(slurp_file(s.p("a.json")) == slurp_file(s.p("b.json")));
}

TEST_CASE("predictions match the library pipeline bitwise") {
  Scratch s;
  REQUIRE(run_cli(s, "gen-synthetic --out " + s.p("d.csv") + " --samples 100 --seed 13")
              .exit_code == 0);
  REQUIRE(run_cli(s, "train --data " + s.p("d.csv") + " --map poly --local-dim 3 "
                     "--rank 4 --epochs 2 --seed 13 --out " + s.p("m.json"))
              .exit_code == 0);
  REQUIRE(run_cli(s, "predict --model " + s.p("m.json") + " --data " + s.p("d.csv") +
                         " --out " + s.p("p.csv"))
              .exit_code == 0);

  // Recreate the inference path with the library directly.
  const CpModel model = load_model_file(s.p("m.json"));
  const nlohmann::json prep = nlohmann::json::parse(slurp_file(s.p("m.json.prep.json")));
  std::vector<ColumnSchema> schema;
  for (const auto& c : prep.at("columns")) {
    schema.push_back({c.at("name").get<std::string>(),
                      c.at("kind").get<std::string>() == "categorical"
                          ? ColumnKind::Categorical
                          : ColumnKind::Dense,
                      c.at("dictionary").get<std::vector<std::string>>()});
  }
  StandardizationStats stats;
  stats.mean = prep.at("mean").get<std::vector<double>>();
  stats.stddev = prep.at("stddev").get<std::vector<double>>();
  const Dataset data = encode_csv_with_schema(
      s.p("d.csv"), schema, stats, prep.at("target_column").get<std::string>(), false);
  const std::vector<double> want = predict_batch(model, data.rows);

  std::ifstream preds(s.p("p.csv"));
  std::string line;
  std::getline(preds, line);
  REQUIRE(line == "prediction");
  for (double w : want) {
    REQUIRE(std::getline(preds, line));
    CHECK(std::stod(line) == w);  // 17 significant digits round-trip
  }
  CHECK_FALSE(std::getline(preds, line));
}

TEST_CASE("predict on a header-only csv writes an empty prediction column") {
  Scratch s;
  REQUIRE(run_cli(s, "gen-synthetic --out " + s.p("d.csv") + " --samples 60 --seed 15")
              .exit_code == 0);
  REQUIRE(run_cli(s, "train --data " + s.p("d.csv") + " --map poly --local-dim 2 "
                     "--rank 2 --epochs 1 --seed 15 --out " + s.p("m.json"))
              .exit_code == 0);

  std::ofstream empty(s.p("empty.csv"));
  empty << "x1,x2,x3,x4,x5,x6,x7,y\n";
  empty.close();
  const RunResult r = run_cli(s, "predict --model " + s.p("m.json") + " --data " +
                                     s.p("empty.csv") + " --out " + s.p("p.csv"));
  CHECK(r.exit_code == 0);
  CHECK(slurp_file(s.p("p.csv")) == "prediction\n");
}

TEST_CASE("predict rejects a csv missing a feature column") {
  Scratch s;
  REQUIRE(run_cli(s, "gen-synthetic --out " + s.p("d.csv") + " --samples 60 --seed 17")
              .exit_code == 0);
  REQUIRE(run_cli(s, "train --data " + s.p("d.csv") + " --map poly --local-dim 2 "
                     "--rank 2 --epochs 1 --seed 17 --out " + s.p("m.json"))
              .exit_code == 0);
  std::ofstream bad(s.p("bad.csv"));
  bad << "x1,x2,y\n1,2,3\n";
  bad.close();
  const RunResult r = run_cli(s, "predict --model " + s.p("m.json") + " --data " +
                                     s.p("bad.csv") + " --out " + s.p("p.csv"));
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("x3") != std::string::npos);
}

TEST_CASE("inspect prints coefficients; the all-ones tuple is the bias") {
  Scratch s;
  REQUIRE(run_cli(s, "gen-synthetic --out " + s.p("d.csv") + " --samples 200 --seed 19 "
                     "--degree 1 --noise-std 0.0")
              .exit_code == 0);
  REQUIRE(run_cli(s, "train --data " + s.p("d.csv") + " --map poly --local-dim 3 "
                     "--rank 7 --init linear --epochs 0 --seed 19 --out " + s.p("m.json"))
              .exit_code == 0);

  const RunResult r =
      run_cli(s, "inspect --model " + s.p("m.json") + " --indices 1,1,1,1,1,1,1");
  REQUIRE(r.exit_code == 0);

  const CpModel model = load_model_file(s.p("m.json"));
  const std::vector<std::size_t> zeros(7, 0);
  CHECK(std::stod(r.out) == doctest::Approx(extract_coefficient(model, zeros)));

  // The epoch-0 linear-initialized model predicts with the baseline, whose
  // bias on a noiseless linear task is the all-constant coefficient.
  const Dataset data = load_csv(s.p("d.csv"));
  double target_mean = 0.0;
  for (double y : data.targets) target_mean += y;
  target_mean /= static_cast<double>(data.size());
  // Standardized features make the bias the target mean of the train split;
  // allow slack for the split.
  CHECK(std::stod(r.out) == doctest::Approx(target_mean).epsilon(0.2));

  CHECK(run_cli(s, "inspect --model " + s.p("m.json") + " --indices 1,1").exit_code == 2);
  CHECK(run_cli(s, "inspect --model " + s.p("m.json") + " --indices 9,1,1,1,1,1,1")
            .exit_code == 2);
  CHECK(run_cli(s, "inspect --model " + s.p("m.json") + " --indices fish").exit_code == 1);
}

TEST_CASE("sweep-d emits one row per unique d and warns on duplicates") {
  Scratch s;
  REQUIRE(run_cli(s, "gen-synthetic --out " + s.p("d.csv") + " --samples 120 --seed 21")
              .exit_code == 0);
  const RunResult single = run_cli(
      s, "sweep-d --data " + s.p("d.csv") + " --rank 3 --epochs 2 --seed 21 --d-list 2");
  CHECK(single.exit_code == 0);
  CHECK(count_lines(single.out) == 2);  // header + one row

  const RunResult dup = run_cli(
      s, "sweep-d --data " + s.p("d.csv") + " --rank 3 --epochs 2 --seed 21 --d-list 2,2,3");
  CHECK(dup.exit_code == 0);
  CHECK(count_lines(dup.out) == 3);
  CHECK(dup.err.find("duplicate") != std::string::npos);

  // Sweeps are polynomial-map only.
  CHECK(run_cli(s, "sweep-d --data " + s.p("d.csv") + " --map categorical --d-list 2")
            .exit_code == 1);
}

TEST_CASE("categorical pipeline learns a pure interaction") {
  // Two categorical features whose parities interact; no feature carries
  // first-order signal, so anything above chance AUC comes from learned
  // second-order coefficients.
  Scratch s;
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::ofstream csv(s.p("cat.csv"));
  csv << "user,item,label\n";
  for (int i = 0; i < 1500; ++i) {
    const int u = static_cast<int>(gen() % 8);
    const int it = static_cast<int>(gen() % 12);
    const double p = (u % 2) == (it % 2) ? 0.8 : 0.2;
    csv << 'u' << u << ",i" << it << ',' << (unif(gen) < p ? 1 : 0) << '\n';
  }
  csv.close();

  REQUIRE(run_cli(s, "train --data " + s.p("cat.csv") + " --map categorical --rank 6 "
                     "--init linear --loss mse --reg order --alpha 5e-5 --beta 3.6 "
                     "--lr 0.01 --epochs 120 --seed 4 --out " + s.p("cat.json"))
              .exit_code == 0);
  const RunResult r = run_cli(s, "evaluate --model " + s.p("cat.json") + " --data " +
                                     s.p("cat.csv") + " --metric auc");
  REQUIRE(r.exit_code == 0);
  const double auc = std::stod(r.out.substr(r.out.find(' ')));
  CHECK(auc > 0.7);
}

TEST_CASE("config file values are overridden by flags") {
  Scratch s;
  REQUIRE(run_cli(s, "gen-synthetic --out " + s.p("d.csv") + " --samples 100 --seed 23")
              .exit_code == 0);
  std::ofstream cfg(s.p("run.cfg"));
  cfg << "data=" << s.p("d.csv") << "\nrank=3\nepochs=2\nseed=23\nlocal-dim=2\n";
  cfg.close();

  REQUIRE(run_cli(s, "train --config " + s.p("run.cfg") + " --out " + s.p("a.json"))
              .exit_code == 0);
  CHECK(load_model_file(s.p("a.json")).rank == 3);

  REQUIRE(run_cli(s, "train --config " + s.p("run.cfg") + " --rank 5 --out " + s.p("b.json"))
              .exit_code == 0);
  CHECK(load_model_file(s.p("b.json")).rank == 5);
}
