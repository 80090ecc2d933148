#include "cplearn/regularizer.hpp"

#include <cmath>

#include "cplearn/errors.hpp"

namespace cplearn {

namespace {

// Y^(n) = A^(n) with every column scaled elementwise by b_n.
Matrix weighted_factor(const Matrix& a, const Vector& b) {
  if (b.size() != a.rows()) {
    throw DimensionError("order penalty: b vector length " + std::to_string(b.size()) +
                         " does not match factor rows " + std::to_string(a.rows()));
  }
  Matrix y(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double bi = b[i];
    for (std::size_t j = 0; j < a.cols(); ++j) y(i, j) = bi * a(i, j);
  }
  return y;
}

}  // namespace

std::string to_string(RegKind kind) {
  switch (kind) {
    case RegKind::None:
      return "none";
    case RegKind::L2:
      return "l2";
    case RegKind::Order:
      return "order";
  }
  return "?";
}

RegKind reg_kind_from_string(const std::string& name) {
  if (name == "none") return RegKind::None;
  if (name == "l2") return RegKind::L2;
  if (name == "order") return RegKind::Order;
  throw ConfigError("unknown regularizer '" + name + "'");
}

void RegularizerSpec::validate() const {
  if (alpha < 0.0) throw ConfigError("regularizer: alpha must be non-negative");
  if (kind == RegKind::Order && beta <= 1.0) {
    throw ConfigError("order regularizer: beta must exceed 1");
  }
}

Vector build_b_vector(const RegularizerSpec& spec, const FeatureMapSpec& map_spec,
                      std::size_t mode) {
  if (spec.kind != RegKind::Order) {
    throw ConfigError("build_b_vector: spec is not an order regularizer");
  }
  if (mode >= map_spec.feature_count()) {
    throw InputError("build_b_vector: mode out of range");
  }
  const std::size_t dim = map_spec.local_dims[mode];
  Vector b(dim);
  if (map_spec.kind == MapKind::Categorical) {
    b[0] = 1.0;
    for (std::size_t i = 1; i < dim; ++i) b[i] = spec.beta;
  } else {
    double p = 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
      b[i] = p;
      p *= spec.beta;
    }
  }
  return b;
}

double penalty(const CpModel& model, const RegularizerSpec& spec) {
  switch (spec.kind) {
    case RegKind::None:
      return 0.0;
    case RegKind::L2:
      return l2_penalty(model, spec.alpha);
    case RegKind::Order:
      return order_penalty(model, spec);
  }
  return 0.0;
}

PredictionGradient penalty_gradient(const CpModel& model, const RegularizerSpec& spec) {
  switch (spec.kind) {
    case RegKind::None: {
      PredictionGradient zeros;
      zeros.reserve(model.factors.size());
      for (const Matrix& a : model.factors) zeros.emplace_back(a.rows(), a.cols());
      return zeros;
    }
    case RegKind::L2:
      return l2_gradient(model, spec.alpha);
    case RegKind::Order:
      return order_penalty_gradient(model, spec);
  }
  return {};
}

double order_penalty(const CpModel& model, const RegularizerSpec& spec) {
  spec.validate();
  Matrix p(model.rank, model.rank, 1.0);
  for (std::size_t n = 0; n < model.factors.size(); ++n) {
    const Vector b = build_b_vector(spec, model.map_spec, n);
    const Matrix y = weighted_factor(model.factors[n], b);
    p = hadamard(p, gram(y, y));
  }
  const double value = spec.alpha * sum(p);
  if (!std::isfinite(value)) throw NumericError("order_penalty: non-finite value");
  return value;
}

PredictionGradient order_penalty_gradient(const CpModel& model, const RegularizerSpec& spec) {
  spec.validate();
  const std::size_t n_feat = model.factors.size();
  const std::size_t rank = model.rank;

  std::vector<Vector> b_vectors(n_feat);
  std::vector<Matrix> weighted(n_feat);
  std::vector<Matrix> grams(n_feat);
  for (std::size_t n = 0; n < n_feat; ++n) {
    b_vectors[n] = build_b_vector(spec, model.map_spec, n);
    weighted[n] = weighted_factor(model.factors[n], b_vectors[n]);
    grams[n] = gram(weighted[n], weighted[n]);
  }

  // Leave-one-out Hadamard products of the R x R grams via prefix/suffix
  // arrays; the gram of a one-hot-loaded factor can contain zeros, so the
  // division form of Algorithm 4 is not usable in general.
  std::vector<Matrix> prefix(n_feat + 1, Matrix(rank, rank, 1.0));
  for (std::size_t n = 0; n < n_feat; ++n) prefix[n + 1] = hadamard(prefix[n], grams[n]);

  PredictionGradient grads(n_feat);
  Matrix suffix(rank, rank, 1.0);
  for (std::size_t n = n_feat; n-- > 0;) {
    const Matrix loo = hadamard(prefix[n], suffix);
    Matrix g = matmul(weighted[n], loo);
    const double two_alpha = 2.0 * spec.alpha;
    for (std::size_t i = 0; i < g.rows(); ++i) {
      const double bi = b_vectors[n][i];
      for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) *= two_alpha * bi;
    }
    grads[n] = std::move(g);
    suffix = hadamard(suffix, grams[n]);
  }
  return grads;
}

double l2_penalty(const CpModel& model, double alpha) {
  if (alpha < 0.0) throw ConfigError("l2_penalty: alpha must be non-negative");
  double s = 0.0;
  for (const Matrix& a : model.factors) {
    for (double v : a.data()) s += v * v;
  }
  return alpha * s;
}

PredictionGradient l2_gradient(const CpModel& model, double alpha) {
  if (alpha < 0.0) throw ConfigError("l2_gradient: alpha must be non-negative");
  PredictionGradient grads;
  grads.reserve(model.factors.size());
  for (const Matrix& a : model.factors) {
    Matrix g(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) g.data()[i] = 2.0 * alpha * a.data()[i];
    grads.push_back(std::move(g));
  }
  return grads;
}

}  // namespace cplearn
