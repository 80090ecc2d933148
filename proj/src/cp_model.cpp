#include "cplearn/cp_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cplearn/errors.hpp"

namespace cplearn {

namespace {

constexpr int kFormatVersion = 1;

// Division fast path is only taken when every Hadamard factor entry clears
// this magnitude.
constexpr double kDivisionGuard = 1e-12;

}  // namespace

void CpModel::validate() const {
  map_spec.validate();
  if (rank == 0) throw ValidationError("model: rank must be at least 1");
  if (factors.size() != map_spec.feature_count()) {
    throw ValidationError("model: " + std::to_string(factors.size()) +
                          " factors for " + std::to_string(map_spec.feature_count()) +
                          " features");
  }
  for (std::size_t n = 0; n < factors.size(); ++n) {
    if (factors[n].cols() != rank) {
      throw ValidationError("model: factor " + std::to_string(n) + " has " +
                            std::to_string(factors[n].cols()) + " columns, rank is " +
                            std::to_string(rank));
    }
    if (factors[n].rows() != map_spec.local_dims[n]) {
      throw ValidationError("model: factor " + std::to_string(n) + " has " +
                            std::to_string(factors[n].rows()) + " rows, local dim is " +
                            std::to_string(map_spec.local_dims[n]));
    }
    if (!factors[n].all_finite()) {
      throw ValidationError("model: factor " + std::to_string(n) +
                            " contains non-finite entries");
    }
  }
}

double predict(const CpModel& model, std::span<const double> x) {
  const auto mapped = model.map_spec.map_row(x);
  Vector p(model.rank, 1.0);
  for (std::size_t n = 0; n < mapped.size(); ++n) {
    const Vector m = vec_mat(mapped[n], model.factors[n]);
    for (std::size_t r = 0; r < p.size(); ++r) p[r] *= m[r];
  }
  const double y = sum(p);
  if (!std::isfinite(y)) throw NumericError("predict: non-finite prediction");
  return y;
}

std::vector<double> predict_batch(const CpModel& model,
                                  const std::vector<std::vector<double>>& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    try {
      out.push_back(predict(model, rows[i]));
    } catch (const Error& e) {
      throw InputError("row " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

PredictionGradient prediction_gradient(const CpModel& model, std::span<const double> x) {
  PredictionGradient grads;
  predict_with_gradient(model, x, grads);
  return grads;
}

double predict_with_gradient(const CpModel& model, std::span<const double> x,
                             PredictionGradient& gradient) {
  const auto mapped = model.map_spec.map_row(x);
  const std::size_t n_feat = mapped.size();
  const std::size_t rank = model.rank;

  std::vector<Vector> m(n_feat);
  bool division_safe = true;
  for (std::size_t n = 0; n < n_feat; ++n) {
    m[n] = vec_mat(mapped[n], model.factors[n]);
    for (double v : m[n]) {
      if (std::abs(v) <= kDivisionGuard) division_safe = false;
      if (!std::isfinite(v)) throw NumericError("prediction_gradient: non-finite product");
    }
  }

  std::vector<Vector> leave_one_out(n_feat);
  if (division_safe) {
    Vector p(rank, 1.0);
    for (const auto& mn : m)
      for (std::size_t r = 0; r < rank; ++r) p[r] *= mn[r];
    for (std::size_t n = 0; n < n_feat; ++n) {
      Vector d(rank);
      for (std::size_t r = 0; r < rank; ++r) d[r] = p[r] / m[n][r];
      leave_one_out[n] = std::move(d);
    }
  } else {
    // prefix[n] = hadamard of m_0..m_{n-1}, suffix = hadamard of m_{n+1}..
    std::vector<Vector> prefix(n_feat + 1, Vector(rank, 1.0));
    for (std::size_t n = 0; n < n_feat; ++n) {
      for (std::size_t r = 0; r < rank; ++r) prefix[n + 1][r] = prefix[n][r] * m[n][r];
    }
    Vector suffix(rank, 1.0);
    for (std::size_t n = n_feat; n-- > 0;) {
      Vector d(rank);
      for (std::size_t r = 0; r < rank; ++r) d[r] = prefix[n][r] * suffix[r];
      leave_one_out[n] = std::move(d);
      for (std::size_t r = 0; r < rank; ++r) suffix[r] *= m[n][r];
    }
  }

  gradient.clear();
  gradient.reserve(n_feat);
  for (std::size_t n = 0; n < n_feat; ++n) {
    gradient.push_back(outer(mapped[n], leave_one_out[n]));
  }

  // f = (hadamard of all m_n) . 1; reuse the products computed above.
  Vector p(rank, 1.0);
  for (const auto& mn : m)
    for (std::size_t r = 0; r < rank; ++r) p[r] *= mn[r];
  const double y = sum(p);
  if (!std::isfinite(y)) throw NumericError("predict: non-finite prediction");
  return y;
}

double extract_coefficient(const CpModel& model, std::span<const std::size_t> indices) {
  if (indices.size() != model.factors.size()) {
    throw InputError("extract_coefficient: " + std::to_string(indices.size()) +
                     " indices for " + std::to_string(model.factors.size()) + " modes");
  }
  Vector p(model.rank, 1.0);
  for (std::size_t n = 0; n < indices.size(); ++n) {
    const Matrix& a = model.factors[n];
    if (indices[n] >= a.rows()) {
      throw InputError("extract_coefficient: index " + std::to_string(indices[n]) +
                       " out of range for mode " + std::to_string(n) + " of size " +
                       std::to_string(a.rows()));
    }
    const auto row = a.row(indices[n]);
    for (std::size_t r = 0; r < p.size(); ++r) p[r] *= row[r];
  }
  return sum(p);
}

std::string save_model(const CpModel& model) {
  model.validate();
  nlohmann::json doc;
  doc["format_version"] = kFormatVersion;
  doc["map_kind"] = to_string(model.map_spec.kind);
  doc["local_dims"] = model.map_spec.local_dims;
  doc["rank"] = model.rank;
  nlohmann::json factors = nlohmann::json::array();
  for (const Matrix& a : model.factors) {
    factors.push_back(std::vector<double>(a.data().begin(), a.data().end()));
  }
  doc["factors"] = std::move(factors);
  return doc.dump(2);
}

CpModel load_model(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kFormatVersion) {
      throw ValidationError("model document: unknown format_version " +
                            std::to_string(version));
    }
    CpModel model;
    model.map_spec.kind = map_kind_from_string(doc.at("map_kind").get<std::string>());
    model.map_spec.local_dims = doc.at("local_dims").get<std::vector<std::size_t>>();
    model.rank = doc.at("rank").get<std::size_t>();
    const auto& factors = doc.at("factors");
    if (!factors.is_array()) throw ValidationError("model document: factors not an array");
    for (std::size_t n = 0; n < factors.size(); ++n) {
      const auto flat = factors[n].get<std::vector<double>>();
      if (n >= model.map_spec.local_dims.size() ||
          flat.size() != model.map_spec.local_dims[n] * model.rank) {
        throw ValidationError("model document: factor " + std::to_string(n) +
                              " has inconsistent size");
      }
      Matrix a(model.map_spec.local_dims[n], model.rank);
      std::copy(flat.begin(), flat.end(), a.data().begin());
      model.factors.push_back(std::move(a));
    }
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model document: ") + e.what());
  }
}

void save_model_file(const CpModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << save_model(model) << '\n';
  if (!out) throw InputError("failed writing '" + path + "'");
}

CpModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str());
}

}  // namespace cplearn
