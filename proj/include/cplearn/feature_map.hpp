#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cplearn/linalg.hpp"

namespace cplearn {

enum class MapKind { Polynomial, NormalizedPolynomial, Categorical };

std::string to_string(MapKind kind);
MapKind map_kind_from_string(const std::string& name);

/// Which local map applies to each feature and its per-feature output
/// dimension. Polynomial kinds use one uniform dimension d >= 2; the
/// categorical kind stores K_n + 1 per feature, where K_n is the category
/// cardinality.
struct FeatureMapSpec {
  MapKind kind = MapKind::Polynomial;
  std::vector<std::size_t> local_dims;

  std::size_t feature_count() const { return local_dims.size(); }

  static FeatureMapSpec polynomial(std::size_t features, std::size_t local_dim,
                                   bool normalized = false);
  static FeatureMapSpec categorical(const std::vector<std::size_t>& cardinalities);

  void validate() const;

  /// Apply the local map of feature `mode` to the raw value x. Categorical
  /// features expect x to hold an integral value index.
  Vector map(std::size_t mode, double x) const;

  /// Map a full feature row; rejects rows whose length differs from N.
  std::vector<Vector> map_row(std::span<const double> x) const;
};

/// [1, x, x^2, ..., x^(d-1)].
Vector map_polynomial(double x, std::size_t d);

/// map_polynomial(x, d) scaled to unit Euclidean length.
Vector map_normalized_polynomial(double x, std::size_t d);

/// [1, v^T] of length cardinality + 1, v one-hot at value_index.
Vector map_categorical(std::size_t value_index, std::size_t cardinality);

}  // namespace cplearn
