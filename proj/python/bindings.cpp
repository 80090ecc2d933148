#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cplearn/cp_model.hpp"
#include "cplearn/data.hpp"
#include "cplearn/errors.hpp"
#include "cplearn/oracle.hpp"
#include "cplearn/regularizer.hpp"
#include "cplearn/training.hpp"

namespace py = pybind11;
using namespace cplearn;

namespace {

std::vector<std::vector<double>> matrix_to_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    rows[i].assign(m.row(i).begin(), m.row(i).end());
  }
  return rows;
}

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw InputError("matrix needs at least one row");
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw InputError("ragged matrix rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Dataset dense_dataset(const std::vector<std::vector<double>>& rows,
                      const std::vector<double>& targets) {
  if (rows.size() != targets.size()) {
    throw InputError("rows and targets must have equal length");
  }
  if (rows.empty()) throw InputError("dataset needs at least one row");
  Dataset data;
  data.schema.resize(rows[0].size());
  for (std::size_t f = 0; f < data.schema.size(); ++f) {
    data.schema[f].name = "x" + std::to_string(f + 1);
    data.schema[f].kind = ColumnKind::Dense;
  }
  data.rows = rows;
  data.targets = targets;
  return data;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Supervised learning with an implicit CP-format weight tensor";

  py::register_exception<Error>(m, "CplearnError");

  py::enum_<MapKind>(m, "MapKind")
      .value("POLYNOMIAL", MapKind::Polynomial)
      .value("NORMALIZED_POLYNOMIAL", MapKind::NormalizedPolynomial)
      .value("CATEGORICAL", MapKind::Categorical);

  py::enum_<RegKind>(m, "RegKind")
      .value("NONE", RegKind::None)
      .value("L2", RegKind::L2)
      .value("ORDER", RegKind::Order);

  py::enum_<Loss>(m, "Loss").value("MSE", Loss::MSE).value("BCE", Loss::LogisticBCE);

  py::enum_<Metric>(m, "Metric")
      .value("MSE", Metric::MSE)
      .value("AUC", Metric::AUC)
      .value("ACCURACY", Metric::Accuracy);

  py::enum_<OptimizerKind>(m, "Optimizer")
      .value("SGD", OptimizerKind::SGD)
      .value("ADAM", OptimizerKind::Adam);

  py::enum_<InitScheme>(m, "Init")
      .value("RANDOM", InitScheme::RandomGaussian)
      .value("LINEAR", InitScheme::LinearModel);

  py::class_<FeatureMapSpec>(m, "FeatureMapSpec")
      .def_static("polynomial", &FeatureMapSpec::polynomial, py::arg("features"),
                  py::arg("local_dim"), py::arg("normalized") = false)
      .def_static("categorical", &FeatureMapSpec::categorical, py::arg("cardinalities"))
      .def_readonly("kind", &FeatureMapSpec::kind)
      .def_readonly("local_dims", &FeatureMapSpec::local_dims)
      .def("map", &FeatureMapSpec::map, py::arg("mode"), py::arg("value"));

  m.def("map_polynomial", &map_polynomial, py::arg("x"), py::arg("d"));
  m.def("map_normalized_polynomial", &map_normalized_polynomial, py::arg("x"), py::arg("d"));
  m.def("map_categorical", &map_categorical, py::arg("value_index"), py::arg("cardinality"));

  py::class_<CpModel>(m, "CpModel")
      .def_readonly("rank", &CpModel::rank)
      .def_readonly("map_spec", &CpModel::map_spec)
      .def_property_readonly("factors",
                             [](const CpModel& model) {
                               std::vector<std::vector<std::vector<double>>> out;
                               for (const Matrix& a : model.factors) {
                                 out.push_back(matrix_to_rows(a));
                               }
                               return out;
                             })
      .def("predict",
           [](const CpModel& model, const std::vector<double>& x) {
             return predict(model, x);
           },
           py::arg("x"))
      .def("predict_batch",
           [](const CpModel& model, const std::vector<std::vector<double>>& rows) {
             return predict_batch(model, rows);
           },
           py::arg("rows"))
      .def("prediction_gradient",
           [](const CpModel& model, const std::vector<double>& x) {
             std::vector<std::vector<std::vector<double>>> out;
             for (const Matrix& g : prediction_gradient(model, x)) {
               out.push_back(matrix_to_rows(g));
             }
             return out;
           },
           py::arg("x"))
      .def("extract_coefficient",
           [](const CpModel& model, const std::vector<std::size_t>& indices) {
             return extract_coefficient(model, indices);
           },
           py::arg("indices"))
      .def("save", &save_model_file, py::arg("path"))
      .def("to_json", &save_model)
      .def_static("load", &load_model_file, py::arg("path"))
      .def_static("from_json", &load_model, py::arg("text"));

  m.def("make_model",
        [](const FeatureMapSpec& spec, std::size_t rank,
           const std::vector<std::vector<std::vector<double>>>& factors) {
          CpModel model;
          model.map_spec = spec;
          model.rank = rank;
          for (const auto& rows : factors) model.factors.push_back(matrix_from_rows(rows));
          model.validate();
          return model;
        },
        py::arg("map_spec"), py::arg("rank"), py::arg("factors"));

  py::class_<RegularizerSpec>(m, "RegularizerSpec")
      .def(py::init([](RegKind kind, double alpha, double beta) {
             RegularizerSpec spec;
             spec.kind = kind;
             spec.alpha = alpha;
             spec.beta = beta;
             spec.validate();
             return spec;
           }),
           py::arg("kind") = RegKind::None, py::arg("alpha") = 0.0, py::arg("beta") = 2.0)
      .def_readwrite("kind", &RegularizerSpec::kind)
      .def_readwrite("alpha", &RegularizerSpec::alpha)
      .def_readwrite("beta", &RegularizerSpec::beta);

  m.def("build_b_vector", &build_b_vector, py::arg("spec"), py::arg("map_spec"),
        py::arg("mode"));
  m.def("order_penalty", &order_penalty, py::arg("model"), py::arg("spec"));
  m.def("l2_penalty", &l2_penalty, py::arg("model"), py::arg("alpha"));

  py::class_<ColumnSchema>(m, "ColumnSchema")
      .def_readonly("name", &ColumnSchema::name)
      .def_property_readonly("is_categorical",
                             [](const ColumnSchema& c) {
                               return c.kind == ColumnKind::Categorical;
                             })
      .def_readonly("dictionary", &ColumnSchema::dictionary);

  py::class_<Dataset>(m, "Dataset")
      .def_static("dense", &dense_dataset, py::arg("rows"), py::arg("targets"))
      .def_readonly("rows", &Dataset::rows)
      .def_readonly("targets", &Dataset::targets)
      .def_readonly("schema", &Dataset::schema)
      .def_property_readonly("n_features", &Dataset::feature_count)
      .def("__len__", &Dataset::size)
      .def("cardinalities", &Dataset::cardinalities);

  py::class_<SplitDataset>(m, "SplitDataset")
      .def_readonly("train", &SplitDataset::train)
      .def_readonly("validation", &SplitDataset::validation)
      .def_readonly("test", &SplitDataset::test);

  py::class_<StandardizationStats>(m, "StandardizationStats")
      .def_readonly("mean", &StandardizationStats::mean)
      .def_readonly("stddev", &StandardizationStats::stddev);

  py::class_<SyntheticDataset>(m, "SyntheticDataset")
      .def_readonly("data", &SyntheticDataset::data)
      .def_property_readonly("bias",
                             [](const SyntheticDataset& s) { return s.coefficients.bias; })
      .def_property_readonly(
          "linear", [](const SyntheticDataset& s) { return s.coefficients.linear; })
      .def_property_readonly(
          "pairwise", [](const SyntheticDataset& s) { return s.coefficients.pairwise; });

  m.def("load_csv",
        [](const std::string& path, const std::string& target_column,
           const std::vector<std::string>& categorical_columns) {
          return load_csv(path, target_column, categorical_columns);
        },
        py::arg("path"), py::arg("target_column") = "",
        py::arg("categorical_columns") = std::vector<std::string>{});
  m.def("save_csv", &save_csv, py::arg("data"), py::arg("path"));
  m.def("generate_synthetic_poly", &generate_synthetic_poly, py::arg("n_samples"),
        py::arg("informative"), py::arg("noise_features"), py::arg("noise_std"),
        py::arg("seed"), py::arg("degree") = 2);
  m.def("split",
        [](const Dataset& data, double test_fraction, double validation_fraction,
           std::uint64_t seed) {
          return split(data, SplitSpec{test_fraction, validation_fraction, seed});
        },
        py::arg("data"), py::arg("test_fraction") = 0.2,
        py::arg("validation_fraction") = 0.2, py::arg("seed") = 0);
  m.def("standardize_fit", &standardize_fit, py::arg("train"));
  m.def("standardize_apply", &standardize_apply, py::arg("stats"), py::arg("data"));

  py::class_<LinearSolution>(m, "LinearSolution")
      .def(py::init([](double bias, const std::vector<std::vector<double>>& weights) {
             LinearSolution lin;
             lin.bias = bias;
             lin.weights = weights;
             return lin;
           }),
           py::arg("bias"), py::arg("weights"))
      .def_readwrite("bias", &LinearSolution::bias)
      .def_readwrite("weights", &LinearSolution::weights);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init([](std::size_t rank, std::size_t epochs, std::size_t batch_size,
                       OptimizerKind optimizer, double learning_rate, Loss loss,
                       RegularizerSpec regularizer, InitScheme init, double init_sigma,
                       std::uint64_t seed, bool shuffle) {
             TrainConfig config;
             config.rank = rank;
             config.epochs = epochs;
             config.batch_size = batch_size;
             config.optimizer = optimizer;
             config.learning_rate = learning_rate;
             config.loss = loss;
             config.regularizer = regularizer;
             config.init = init;
             config.init_sigma = init_sigma;
             config.seed = seed;
             config.shuffle = shuffle;
             config.validate();
             return config;
           }),
           py::arg("rank") = 8, py::arg("epochs") = 30, py::arg("batch_size") = 32,
           py::arg("optimizer") = OptimizerKind::Adam, py::arg("learning_rate") = 1e-3,
           py::arg("loss") = Loss::MSE, py::arg("regularizer") = RegularizerSpec{},
           py::arg("init") = InitScheme::RandomGaussian, py::arg("init_sigma") = 0.2,
           py::arg("seed") = 0, py::arg("shuffle") = true)
      .def_readwrite("rank", &TrainConfig::rank)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<EpochStats>(m, "EpochStats")
      .def_readonly("train_loss", &EpochStats::train_loss)
      .def_readonly("validation_loss", &EpochStats::validation_loss)
      .def_readonly("seconds", &EpochStats::seconds);

  py::class_<FitReport>(m, "FitReport").def_readonly("epochs", &FitReport::epochs);

  m.def("init_random", &init_random, py::arg("map_spec"), py::arg("rank"), py::arg("sigma"),
        py::arg("seed"));
  m.def("init_linear", &init_linear, py::arg("linear_solution"), py::arg("map_spec"),
        py::arg("rank"));
  m.def("linear_predict",
        [](const LinearSolution& lin, const FeatureMapSpec& spec,
           const std::vector<double>& x) { return linear_predict(lin, spec, x); },
        py::arg("linear_solution"), py::arg("map_spec"), py::arg("x"));
  m.def("fit_linear_baseline", &fit_linear_baseline, py::arg("data"), py::arg("map_spec"),
        py::arg("loss") = Loss::MSE);
  m.def("fit",
        [](CpModel& model, const Dataset& train, const Dataset& validation,
           const TrainConfig& config) { return fit(model, train, validation, config); },
        py::arg("model"), py::arg("train"), py::arg("validation"), py::arg("config"));
  m.def("evaluate", &evaluate, py::arg("model"), py::arg("data"), py::arg("metric"));
  m.def("evaluate_scores", &evaluate_scores, py::arg("scores"), py::arg("targets"),
        py::arg("metric"));

  m.def("materialize_weights", [](const CpModel& model) {
    const auto mat = oracle::materialize(model);
    return std::make_pair(mat.local_dims,
                          std::vector<double>(mat.weight_tensor.data().begin(),
                                              mat.weight_tensor.data().end()));
  });

  m.attr("__version__") = "0.1.0";
}
