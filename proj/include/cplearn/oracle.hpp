#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cplearn/cp_model.hpp"
#include "cplearn/linalg.hpp"
#include "cplearn/regularizer.hpp"

namespace cplearn {
namespace oracle {

/// Fully materialized weight tensor of a model, at desk scale only. Used to
/// cross-check the factored fast paths; nothing in the library's prediction
/// or training route goes through this.
struct MaterializedModel {
  DenseTensor weight_tensor;
  std::vector<std::size_t> local_dims;
};

/// Entry (i_1,...,i_N) = sum_r prod_n A^(n)(i_n, r). Throws CapacityError
/// when prod local_dims exceeds the DenseTensor budget.
MaterializedModel materialize(const CpModel& model);

/// Builds the full rank-1 feature tensor and takes the raw inner product
/// with the materialized weights.
double predict_oracle(const MaterializedModel& mat, const FeatureMapSpec& map_spec,
                      std::span<const double> x);

/// alpha * <B (*) W, B (*) W> with B materialized as the outer chain of the
/// per-mode b vectors.
double order_penalty_oracle(const MaterializedModel& mat,
                            const std::vector<Vector>& b_vectors, double alpha);

/// Central finite differences of a scalar function of the model over every
/// factor entry; step h = base_step * max(1, |entry|).
PredictionGradient finite_difference(const std::function<double(const CpModel&)>& f,
                                     const CpModel& model, double base_step = 1e-6);

}  // namespace oracle
}  // namespace cplearn
