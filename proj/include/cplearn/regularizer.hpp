#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cplearn/cp_model.hpp"
#include "cplearn/linalg.hpp"

namespace cplearn {

enum class RegKind { None, L2, Order };

std::string to_string(RegKind kind);
RegKind reg_kind_from_string(const std::string& name);

/// Penalty configuration. Order regularization weights the coefficient of
/// each interaction by a per-mode vector b built from beta: geometric in the
/// transform index for polynomial maps, flat beta over the one-hot block for
/// categorical maps.
struct RegularizerSpec {
  RegKind kind = RegKind::None;
  double alpha = 0.0;
  double beta = 0.0;  // Order only, must be > 1

  void validate() const;
};

/// Per-mode b vector of the order penalty: polynomial maps get
/// [1, beta, beta^2, ...] of length d, categorical maps [1, beta, ..., beta]
/// of length K_n + 1.
Vector build_b_vector(const RegularizerSpec& spec, const FeatureMapSpec& map_spec,
                      std::size_t mode);

/// alpha * 1^T (hadamard over k of Y^(k)T Y^(k)) 1 with Y^(n) = A^(n) * B
/// elementwise; equals alpha * <B (*) W, B (*) W> on the materialized tensor.
/// Returns 0 for a None spec; forwards to l2_penalty for L2.
double penalty(const CpModel& model, const RegularizerSpec& spec);
PredictionGradient penalty_gradient(const CpModel& model, const RegularizerSpec& spec);

double order_penalty(const CpModel& model, const RegularizerSpec& spec);
PredictionGradient order_penalty_gradient(const CpModel& model, const RegularizerSpec& spec);

/// alpha * sum_n ||A^(n)||_F^2 and its gradient 2 alpha A^(n).
double l2_penalty(const CpModel& model, double alpha);
PredictionGradient l2_gradient(const CpModel& model, double alpha);

}  // namespace cplearn
