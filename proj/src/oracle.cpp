#include "cplearn/oracle.hpp"

#include <cmath>

#include "cplearn/errors.hpp"

namespace cplearn {
namespace oracle {

MaterializedModel materialize(const CpModel& model) {
  model.validate();
  DenseTensor w(model.map_spec.local_dims);

  // Sum of R rank-1 tensors, one per column of the factor set.
  for (std::size_t r = 0; r < model.rank; ++r) {
    std::vector<Vector> columns;
    columns.reserve(model.factors.size());
    for (const Matrix& a : model.factors) {
      Vector col(a.rows());
      for (std::size_t i = 0; i < a.rows(); ++i) col[i] = a(i, r);
      columns.push_back(std::move(col));
    }
    const DenseTensor term = outer_product_chain(columns);
    auto wd = w.data();
    const auto td = term.data();
    for (std::size_t i = 0; i < wd.size(); ++i) wd[i] += td[i];
  }
  return MaterializedModel{std::move(w), model.map_spec.local_dims};
}

double predict_oracle(const MaterializedModel& mat, const FeatureMapSpec& map_spec,
                      std::span<const double> x) {
  const auto mapped = map_spec.map_row(x);
  const DenseTensor phi = outer_product_chain(mapped);
  return inner(phi, mat.weight_tensor);
}

double order_penalty_oracle(const MaterializedModel& mat,
                            const std::vector<Vector>& b_vectors, double alpha) {
  const DenseTensor b = outer_product_chain(b_vectors);
  const DenseTensor bw = hadamard(b, mat.weight_tensor);
  return alpha * inner(bw, bw);
}

PredictionGradient finite_difference(const std::function<double(const CpModel&)>& f,
                                     const CpModel& model, double base_step) {
  if (base_step <= 0.0) throw InputError("finite_difference: step must be positive");
  CpModel probe = model;
  PredictionGradient grads;
  grads.reserve(model.factors.size());
  for (std::size_t n = 0; n < model.factors.size(); ++n) {
    const Matrix& a = model.factors[n];
    Matrix g(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
      for (std::size_t j = 0; j < a.cols(); ++j) {
        const double theta = a(i, j);
        const double h = base_step * std::max(1.0, std::abs(theta));
        probe.factors[n](i, j) = theta + h;
        const double up = f(probe);
        probe.factors[n](i, j) = theta - h;
        const double down = f(probe);
        probe.factors[n](i, j) = theta;
        if (!std::isfinite(up) || !std::isfinite(down)) {
          throw NumericError("finite_difference: non-finite function value");
        }
        g(i, j) = (up - down) / (2.0 * h);
      }
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

}  // namespace oracle
}  // namespace cplearn
