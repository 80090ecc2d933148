// Command-line front end: train, evaluate, predict, inspect coefficients,
// and run local-dimension / rank sweeps.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cplearn/cp_model.hpp"
#include "cplearn/data.hpp"
#include "cplearn/errors.hpp"
#include "cplearn/training.hpp"

namespace {

using namespace cplearn;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

// Everything train-shaped commands share; mirrors the config-file keys.
struct RunOptions {
  std::string config_path;
  std::string data_path;
  std::string target_column;
  std::string map_name = "poly";
  std::size_t local_dim = 3;
  std::size_t rank = 8;
  std::string loss_name = "mse";
  std::string reg_name = "none";
  double alpha = 0.0;
  double beta = 2.0;
  std::string init_name = "random";
  double sigma = 0.2;
  double learning_rate = 1e-3;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  bool no_shuffle = false;
  double test_fraction = 0.2;
  double validation_fraction = 0.2;
  std::string out_path;
  std::string report_path;
};

void add_run_options(CLI::App* cmd, RunOptions& opts, bool needs_out) {
  cmd->add_option("--config", opts.config_path,
                  "Flat key=value config file; flags override it");
  cmd->add_option("--data", opts.data_path, "Training CSV (header row required)");
  cmd->add_option("--target-column", opts.target_column,
                  "Target column name (default: last column)");
  cmd->add_option("--map", opts.map_name, "Feature map: poly | poly-norm | categorical")
      ->check(CLI::IsMember({"poly", "poly-norm", "categorical"}));
  cmd->add_option("--local-dim", opts.local_dim,
                  "Local dimension d for polynomial maps (ignored for categorical)");
  cmd->add_option("--rank", opts.rank, "CP rank R");
  cmd->add_option("--loss", opts.loss_name, "Loss: mse | bce")
      ->check(CLI::IsMember({"mse", "bce"}));
  cmd->add_option("--reg", opts.reg_name, "Regularizer: none | l2 | order")
      ->check(CLI::IsMember({"none", "l2", "order"}));
  cmd->add_option("--alpha", opts.alpha, "Regularization strength");
  cmd->add_option("--beta", opts.beta, "Order-regularization base (> 1)");
  cmd->add_option("--init", opts.init_name, "Initialization: random | linear")
      ->check(CLI::IsMember({"random", "linear"}));
  cmd->add_option("--sigma", opts.sigma, "Std deviation of random init");
  cmd->add_option("--lr", opts.learning_rate, "Adam/SGD learning rate");
  cmd->add_option("--epochs", opts.epochs, "Training epochs");
  cmd->add_option("--batch-size", opts.batch_size, "Mini-batch size");
  cmd->add_option("--seed", opts.seed, "Seed for splits, init, and shuffling");
  cmd->add_flag("--no-shuffle", opts.no_shuffle, "Keep sample order fixed per epoch");
  cmd->add_option("--test-fraction", opts.test_fraction, "Test split fraction");
  cmd->add_option("--val-fraction", opts.validation_fraction,
                  "Validation fraction of the remainder");
  cmd->add_option("--out", opts.out_path, "Output model file");
  cmd->add_option("--report", opts.report_path,
                  "Per-epoch report CSV (default: <out>.report.csv)");
  (void)needs_out;
}

// Flat key=value config file, keys named after the long flags. Values from
// the file fill only options that were not set on the command line.
void apply_config_file(const CLI::App* cmd, RunOptions& opts) {
  if (opts.config_path.empty()) return;
  std::ifstream in(opts.config_path);
  if (!in) throw ConfigError("cannot open config file '" + opts.config_path + "'");

  const std::unordered_map<std::string, std::function<void(const std::string&)>> setters = {
      {"data", [&](const std::string& v) { opts.data_path = v; }},
      {"target-column", [&](const std::string& v) { opts.target_column = v; }},
      {"map", [&](const std::string& v) { opts.map_name = v; }},
      {"local-dim", [&](const std::string& v) { opts.local_dim = std::stoul(v); }},
      {"rank", [&](const std::string& v) { opts.rank = std::stoul(v); }},
      {"loss", [&](const std::string& v) { opts.loss_name = v; }},
      {"reg", [&](const std::string& v) { opts.reg_name = v; }},
      {"alpha", [&](const std::string& v) { opts.alpha = std::stod(v); }},
      {"beta", [&](const std::string& v) { opts.beta = std::stod(v); }},
      {"init", [&](const std::string& v) { opts.init_name = v; }},
      {"sigma", [&](const std::string& v) { opts.sigma = std::stod(v); }},
      {"lr", [&](const std::string& v) { opts.learning_rate = std::stod(v); }},
      {"epochs", [&](const std::string& v) { opts.epochs = std::stoul(v); }},
      {"batch-size", [&](const std::string& v) { opts.batch_size = std::stoul(v); }},
      {"seed", [&](const std::string& v) { opts.seed = std::stoull(v); }},
      {"no-shuffle", [&](const std::string& v) { opts.no_shuffle = v == "true" || v == "1"; }},
      {"test-fraction", [&](const std::string& v) { opts.test_fraction = std::stod(v); }},
      {"val-fraction",
       [&](const std::string& v) { opts.validation_fraction = std::stod(v); }},
      {"out", [&](const std::string& v) { opts.out_path = v; }},
      {"report", [&](const std::string& v) { opts.report_path = v; }},
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config '" + opts.config_path + "' line " +
                        std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError("config '" + opts.config_path + "' line " +
                        std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (cmd->count("--" + key) > 0) continue;  // flags override the file
    try {
      it->second(value);
    } catch (const std::exception&) {
      throw ConfigError("config '" + opts.config_path + "' line " +
                        std::to_string(line_no) + ": cannot parse value '" + value +
                        "' for key '" + key + "'");
    }
  }
}

void finalize_run_options(const CLI::App* cmd, RunOptions& opts, bool needs_out) {
  apply_config_file(cmd, opts);
  if (opts.data_path.empty()) throw ConfigError("no --data given (flag or config file)");
  if (needs_out && opts.out_path.empty()) {
    throw ConfigError("no --out given (flag or config file)");
  }
  static const std::vector<std::string> maps = {"poly", "poly-norm", "categorical"};
  if (std::find(maps.begin(), maps.end(), opts.map_name) == maps.end()) {
    throw ConfigError("unknown map '" + opts.map_name + "'");
  }
}

TrainConfig to_train_config(const RunOptions& opts) {
  TrainConfig config;
  config.rank = opts.rank;
  config.epochs = opts.epochs;
  config.batch_size = opts.batch_size;
  config.learning_rate = opts.learning_rate;
  config.loss = loss_from_string(opts.loss_name);
  config.regularizer.kind = reg_kind_from_string(opts.reg_name);
  config.regularizer.alpha = opts.alpha;
  config.regularizer.beta = opts.beta;
  config.init = opts.init_name == "linear" ? InitScheme::LinearModel
                                           : InitScheme::RandomGaussian;
  config.init_sigma = opts.sigma;
  config.seed = opts.seed;
  config.shuffle = !opts.no_shuffle;
  return config;
}

struct PreparedData {
  SplitDataset parts;
  FeatureMapSpec map_spec;
  std::optional<StandardizationStats> stats;
  std::string target_column;
};

PreparedData prepare_data(const RunOptions& opts) {
  const MapKind kind = map_kind_from_string(opts.map_name);

  CsvReadOptions read;
  read.target_column = opts.target_column;
  read.all_categorical = kind == MapKind::Categorical;
  const Dataset raw = load_csv(opts.data_path, read);

  if (kind != MapKind::Categorical) {
    for (const auto& col : raw.schema) {
      if (col.kind != ColumnKind::Dense) {
        throw DataError("column '" + col.name +
                        "' is categorical; polynomial maps need dense features");
      }
    }
  }

  SplitSpec split_spec;
  split_spec.test_fraction = opts.test_fraction;
  split_spec.validation_fraction = opts.validation_fraction;
  split_spec.seed = opts.seed;

  PreparedData out;
  out.parts = split(raw, split_spec);
  out.target_column = raw.target_name;

  if (kind == MapKind::Categorical) {
    out.map_spec = FeatureMapSpec::categorical(raw.cardinalities());
  } else {
    out.map_spec = FeatureMapSpec::polynomial(raw.feature_count(), opts.local_dim,
                                              kind == MapKind::NormalizedPolynomial);
    out.stats = standardize_fit(out.parts.train);
    out.parts.train = standardize_apply(*out.stats, out.parts.train);
    out.parts.validation = standardize_apply(*out.stats, out.parts.validation);
    out.parts.test = standardize_apply(*out.stats, out.parts.test);
  }
  return out;
}

std::string default_prep_path(const std::string& model_path) {
  return model_path + ".prep.json";
}

void save_prep(const std::string& path, const std::vector<ColumnSchema>& schema,
               const std::optional<StandardizationStats>& stats,
               const std::string& target_column) {
  nlohmann::json doc;
  doc["target_column"] = target_column;
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& col : schema) {
    nlohmann::json c;
    c["name"] = col.name;
    c["kind"] = col.kind == ColumnKind::Categorical ? "categorical" : "dense";
    c["dictionary"] = col.dictionary;
    cols.push_back(std::move(c));
  }
  doc["columns"] = std::move(cols);
  if (stats) {
    doc["mean"] = stats->mean;
    doc["stddev"] = stats->stddev;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << doc.dump(2) << '\n';
}

struct PrepInfo {
  std::vector<ColumnSchema> schema;
  std::optional<StandardizationStats> stats;
  std::string target_column;
};

PrepInfo load_prep(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open preprocessor file '" + path +
                     "' (written next to the model at training time)");
  }
  nlohmann::json doc;
  try {
    in >> doc;
    PrepInfo info;
    info.target_column = doc.at("target_column").get<std::string>();
    for (const auto& c : doc.at("columns")) {
      ColumnSchema col;
      col.name = c.at("name").get<std::string>();
      col.kind = c.at("kind").get<std::string>() == "categorical" ? ColumnKind::Categorical
                                                                  : ColumnKind::Dense;
      col.dictionary = c.at("dictionary").get<std::vector<std::string>>();
      info.schema.push_back(std::move(col));
    }
    if (doc.contains("mean")) {
      StandardizationStats stats;
      stats.mean = doc.at("mean").get<std::vector<double>>();
      stats.stddev = doc.at("stddev").get<std::vector<double>>();
      info.stats = std::move(stats);
    }
    return info;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("preprocessor file '" + path + "': " + e.what());
  }
}

void write_report(const std::string& path, const FitReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << "epoch,train_loss,val_loss,seconds\n";
  out.precision(17);
  for (std::size_t e = 0; e < report.epochs.size(); ++e) {
    const auto& row = report.epochs[e];
    out << e + 1 << ',' << row.train_loss << ',' << row.validation_loss << ','
        << row.seconds << '\n';
  }
}

double best_validation_loss(const FitReport& report, double fallback) {
  double best = fallback;
  for (const auto& row : report.epochs) {
    if (std::isfinite(row.validation_loss)) best = std::min(best, row.validation_loss);
  }
  return best;
}

int cmd_train(const RunOptions& opts) {
  PreparedData data = prepare_data(opts);
  const TrainConfig config = to_train_config(opts);

  CpModel model = make_initial_model(data.map_spec, config, data.parts.train);
  const FitReport report = fit(model, data.parts.train, data.parts.validation, config);

  save_model_file(model, opts.out_path);
  save_prep(default_prep_path(opts.out_path), data.parts.train.schema, data.stats,
            data.target_column);
  const std::string report_path =
      opts.report_path.empty() ? opts.out_path + ".report.csv" : opts.report_path;
  write_report(report_path, report);

  const double final_val = report.epochs.empty()
                               ? evaluate(model, data.parts.validation, Metric::MSE)
                               : report.epochs.back().validation_loss;
  std::cout << "trained " << to_string(data.map_spec.kind) << " model: rank " << model.rank
            << ", epochs " << report.epochs.size() << ", final val loss " << final_val
            << "\nmodel: " << opts.out_path << "\nreport: " << report_path << std::endl;
  return kExitOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& prep_path,
                 const std::string& data_path, const std::string& metric_name) {
  const CpModel model = load_model_file(model_path);
  const PrepInfo prep =
      load_prep(prep_path.empty() ? default_prep_path(model_path) : prep_path);
  const Dataset data =
      encode_csv_with_schema(data_path, prep.schema, prep.stats, prep.target_column,
                             /*require_target=*/true);
  const double value = evaluate(model, data, metric_from_string(metric_name));
  std::cout.precision(17);
  std::cout << metric_name << " " << value << std::endl;
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& prep_path,
                const std::string& data_path, const std::string& out_path) {
  const CpModel model = load_model_file(model_path);
  const PrepInfo prep =
      load_prep(prep_path.empty() ? default_prep_path(model_path) : prep_path);
  const Dataset data =
      encode_csv_with_schema(data_path, prep.schema, prep.stats, prep.target_column,
                             /*require_target=*/false);
  const std::vector<double> scores = predict_batch(model, data.rows);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + out_path + "' for writing");
  out.precision(17);
  out << "prediction\n";
  for (double s : scores) out << s << '\n';
  std::cout << "wrote " << scores.size() << " predictions to " << out_path << std::endl;
  return kExitOk;
}

int cmd_inspect(const std::string& model_path, const std::string& tuple) {
  const CpModel model = load_model_file(model_path);

  // 1-based indices; index 1 selects the constant entry of each local map.
  std::vector<std::size_t> indices;
  std::stringstream ss(tuple);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      const long v = std::stol(item);
      if (v < 1) throw ConfigError("inspect: indices are 1-based, got " + item);
      indices.push_back(static_cast<std::size_t>(v - 1));
    } catch (const std::invalid_argument&) {
      throw ConfigError("inspect: cannot parse index '" + item + "'");
    } catch (const std::out_of_range&) {
      throw ConfigError("inspect: index '" + item + "' out of range");
    }
  }
  if (indices.empty()) throw ConfigError("inspect: empty index tuple");

  std::cout.precision(17);
  std::cout << extract_coefficient(model, indices) << std::endl;
  return kExitOk;
}

int cmd_gen_synthetic(const std::string& out_path, std::size_t samples,
                      std::size_t informative, std::size_t noise_features, double noise_std,
                      int degree, std::uint64_t seed) {
  const SyntheticDataset synth =
      generate_synthetic_poly(samples, informative, noise_features, noise_std, seed, degree);
  save_csv(synth.data, out_path);
  std::cout << "wrote " << synth.data.size() << " samples ("
            << synth.data.feature_count() << " features, " << informative
            << " informative) to " << out_path << std::endl;
  return kExitOk;
}

template <typename T>
std::vector<T> dedup_warn(const std::vector<T>& values, const char* what) {
  std::vector<T> out;
  for (const T& v : values) {
    if (std::find(out.begin(), out.end(), v) != out.end()) {
      std::cerr << "warning: duplicate " << what << " " << v << " ignored" << std::endl;
      continue;
    }
    out.push_back(v);
  }
  return out;
}

int cmd_sweep(const RunOptions& base, const std::vector<std::size_t>& d_values,
              const std::vector<std::size_t>& rank_values) {
  if (map_kind_from_string(base.map_name) == MapKind::Categorical) {
    throw ConfigError("sweeps need a polynomial or normalized map");
  }
  const bool sweep_d = !d_values.empty();
  const auto values = dedup_warn(sweep_d ? d_values : rank_values, sweep_d ? "d" : "rank");

  std::ostringstream table;
  table.precision(17);
  table << (sweep_d ? "d" : "rank") << ",best_val_loss,seconds\n";
  for (const std::size_t v : values) {
    RunOptions opts = base;
    if (sweep_d) {
      opts.local_dim = v;
    } else {
      opts.rank = v;
    }
    PreparedData data = prepare_data(opts);
    const TrainConfig config = to_train_config(opts);
    CpModel model = make_initial_model(data.map_spec, config, data.parts.train);
    const FitReport report = fit(model, data.parts.train, data.parts.validation, config);
    double seconds = 0.0;
    for (const auto& row : report.epochs) seconds += row.seconds;
    const double best = best_validation_loss(
        report, evaluate(model, data.parts.validation, Metric::MSE));
    table << v << ',' << best << ',' << seconds << '\n';
  }

  std::cout << table.str();
  if (!base.out_path.empty()) {
    std::ofstream out(base.out_path, std::ios::binary);
    if (!out) throw InputError("cannot open '" + base.out_path + "' for writing");
    out << table.str();
  }
  return kExitOk;
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitUsage;
  if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const CapacityError*>(&e)) {
    return kExitNumeric;
  }
  return kExitData;
}

const char* error_tag(int code) {
  switch (code) {
    case kExitUsage:
      return "usage";
    case kExitNumeric:
      return "numeric";
    default:
      return "data";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supervised learning with an implicit CP-format weight tensor"};
  app.require_subcommand(1);

  RunOptions train_opts;
  auto* train = app.add_subcommand("train", "Fit a model on a CSV dataset");
  add_run_options(train, train_opts, /*needs_out=*/true);

  std::string eval_model, eval_prep, eval_data, eval_metric = "mse";
  auto* eval = app.add_subcommand("evaluate", "Score a trained model on a CSV dataset");
  eval->add_option("--model", eval_model, "Model file")->required();
  eval->add_option("--prep", eval_prep, "Preprocessor file (default: <model>.prep.json)");
  eval->add_option("--data", eval_data, "CSV with the target column present")->required();
  eval->add_option("--metric", eval_metric, "mse | auc | accuracy")
      ->check(CLI::IsMember({"mse", "auc", "accuracy"}));

  std::string pred_model, pred_prep, pred_data, pred_out;
  auto* pred = app.add_subcommand("predict", "Write predictions for a feature CSV");
  pred->add_option("--model", pred_model, "Model file")->required();
  pred->add_option("--prep", pred_prep, "Preprocessor file (default: <model>.prep.json)");
  pred->add_option("--data", pred_data, "Feature CSV (target column optional)")->required();
  pred->add_option("--out", pred_out, "Output predictions CSV")->required();

  std::string ins_model, ins_tuple;
  auto* inspect = app.add_subcommand(
      "inspect", "Print the coefficient of one feature interaction");
  inspect->add_option("--model", ins_model, "Model file")->required();
  inspect
      ->add_option("--indices", ins_tuple,
                   "Comma-separated 1-based index per feature; 1 = constant entry")
      ->required();

  RunOptions sweep_d_opts;
  std::vector<std::size_t> d_list;
  auto* sweep_d = app.add_subcommand(
      "sweep-d", "Train across a list of local dimensions, report best val loss");
  add_run_options(sweep_d, sweep_d_opts, /*needs_out=*/false);
  sweep_d->add_option("--d-list", d_list, "Local dimensions to sweep")
      ->required()
      ->delimiter(',');

  RunOptions sweep_r_opts;
  std::vector<std::size_t> rank_list;
  auto* sweep_rank =
      app.add_subcommand("sweep-rank", "Train across a list of ranks, report best val loss");
  add_run_options(sweep_rank, sweep_r_opts, /*needs_out=*/false);
  sweep_rank->add_option("--rank-list", rank_list, "Ranks to sweep")
      ->required()
      ->delimiter(',');

  std::string gen_out;
  std::size_t gen_samples = 3000, gen_informative = 4, gen_noise_features = 3;
  double gen_noise_std = 0.35;
  int gen_degree = 2;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen-synthetic",
                                 "Generate the synthetic polynomial regression CSV");
  gen->add_option("--out", gen_out, "Output CSV path")->required();
  gen->add_option("--samples", gen_samples, "Number of samples");
  gen->add_option("--informative", gen_informative, "Informative feature count");
  gen->add_option("--noise-features", gen_noise_features, "Uninformative feature count");
  gen->add_option("--noise-std", gen_noise_std, "Target noise standard deviation");
  gen->add_option("--degree", gen_degree, "Polynomial degree of the target (1 or 2)");
  gen->add_option("--seed", gen_seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[usage]: " << e.what() << std::endl;
    return kExitUsage;
  }

  try {
    if (train->parsed()) {
      finalize_run_options(train, train_opts, /*needs_out=*/true);
      return cmd_train(train_opts);
    }
    if (eval->parsed()) return cmd_evaluate(eval_model, eval_prep, eval_data, eval_metric);
    if (pred->parsed()) return cmd_predict(pred_model, pred_prep, pred_data, pred_out);
    if (inspect->parsed()) return cmd_inspect(ins_model, ins_tuple);
    if (sweep_d->parsed()) {
      finalize_run_options(sweep_d, sweep_d_opts, /*needs_out=*/false);
      return cmd_sweep(sweep_d_opts, d_list, {});
    }
    if (sweep_rank->parsed()) {
      finalize_run_options(sweep_rank, sweep_r_opts, /*needs_out=*/false);
      return cmd_sweep(sweep_r_opts, {}, rank_list);
    }
    if (gen->parsed()) {
      return cmd_gen_synthetic(gen_out, gen_samples, gen_informative, gen_noise_features,
                               gen_noise_std, gen_degree, gen_seed);
    }
  } catch (const Error& e) {
    const int code = exit_code_for(e);
    std::cerr << "error[" << error_tag(code) << "]: " << e.what() << std::endl;
    return code;
  } catch (const std::exception& e) {
    std::cerr << "error[numeric]: unexpected failure: " << e.what() << std::endl;
    return kExitNumeric;
  }
  return kExitUsage;
}
