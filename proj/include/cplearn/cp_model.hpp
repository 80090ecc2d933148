#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cplearn/feature_map.hpp"
#include "cplearn/linalg.hpp"

namespace cplearn {

/// Predictor whose weight tensor of all feature interactions is held
/// implicitly as N factor matrices: factor n has shape (local_dims[n] x rank)
/// and the weight-tensor entry (i_1,...,i_N) is
/// sum_r prod_n factors[n](i_n, r). The tensor itself is never formed here;
/// predictions and gradients are computed from the factors directly in
/// O(N * rank * d) time.
struct CpModel {
  FeatureMapSpec map_spec;
  std::size_t rank = 0;
  std::vector<Matrix> factors;

  std::size_t feature_count() const { return factors.size(); }

  /// Shape/rank/finiteness of the factor set against the map spec.
  void validate() const;
};

/// Per-factor partial derivatives, shaped like the model's factors.
using PredictionGradient = std::vector<Matrix>;

/// f(x) = (hadamard over k of phi(x_k)^T A^(k)) . 1
double predict(const CpModel& model, std::span<const double> x);

std::vector<double> predict_batch(const CpModel& model,
                                  const std::vector<std::vector<double>>& rows);

/// d f / d A^(n) = phi(x_n) (hadamard over k != n of phi(x_k)^T A^(k)) for
/// every n, at total cost O(N * rank * d). Safe when some phi^T A vanish
/// (routine for one-hot rows): the leave-one-out products come from
/// prefix/suffix arrays, with elementwise division used only as a fast path
/// when every product entry is safely nonzero.
PredictionGradient prediction_gradient(const CpModel& model, std::span<const double> x);

/// Prediction and gradient from one shared pass over the mode products;
/// what the training loop calls per sample.
double predict_with_gradient(const CpModel& model, std::span<const double> x,
                             PredictionGradient& gradient);

/// Weight-tensor entry (indices[0],...,indices[N-1]) in O(N * rank) time:
/// the Hadamard product of the selected factor rows, summed over entries.
double extract_coefficient(const CpModel& model, std::span<const std::size_t> indices);

/// Serialize to a versioned JSON document; round-trips are bit-exact on all
/// factor entries.
std::string save_model(const CpModel& model);
CpModel load_model(const std::string& text);

void save_model_file(const CpModel& model, const std::string& path);
CpModel load_model_file(const std::string& path);

}  // namespace cplearn
