#include "cplearn/feature_map.hpp"

#include <cmath>

#include "cplearn/errors.hpp"

namespace cplearn {

std::string to_string(MapKind kind) {
  switch (kind) {
    case MapKind::Polynomial:
      return "poly";
    case MapKind::NormalizedPolynomial:
      return "poly-norm";
    case MapKind::Categorical:
      return "categorical";
  }
  return "?";
}

MapKind map_kind_from_string(const std::string& name) {
  if (name == "poly") return MapKind::Polynomial;
  if (name == "poly-norm") return MapKind::NormalizedPolynomial;
  if (name == "categorical") return MapKind::Categorical;
  throw ValidationError("unknown map kind '" + name + "'");
}

FeatureMapSpec FeatureMapSpec::polynomial(std::size_t features, std::size_t local_dim,
                                          bool normalized) {
  FeatureMapSpec spec;
  spec.kind = normalized ? MapKind::NormalizedPolynomial : MapKind::Polynomial;
  spec.local_dims.assign(features, local_dim);
  spec.validate();
  return spec;
}

FeatureMapSpec FeatureMapSpec::categorical(const std::vector<std::size_t>& cardinalities) {
  FeatureMapSpec spec;
  spec.kind = MapKind::Categorical;
  spec.local_dims.reserve(cardinalities.size());
  for (std::size_t k : cardinalities) spec.local_dims.push_back(k + 1);
  spec.validate();
  return spec;
}

void FeatureMapSpec::validate() const {
  if (local_dims.empty()) throw ValidationError("feature map: no features");
  for (std::size_t d : local_dims) {
    if (d < 2) {
      // Polynomial kinds need d >= 2; categorical needs K_n >= 1, i.e. d_n >= 2.
      throw ValidationError("feature map: local dimension " + std::to_string(d) +
                            " below minimum of 2");
    }
  }
  if (kind != MapKind::Categorical) {
    for (std::size_t d : local_dims) {
      if (d != local_dims.front()) {
        throw ValidationError("polynomial maps require a uniform local dimension");
      }
    }
  }
}

Vector FeatureMapSpec::map(std::size_t mode, double x) const {
  if (mode >= local_dims.size()) {
    throw InputError("feature map: mode " + std::to_string(mode) + " out of range");
  }
  switch (kind) {
    case MapKind::Polynomial:
      return map_polynomial(x, local_dims[mode]);
    case MapKind::NormalizedPolynomial:
      return map_normalized_polynomial(x, local_dims[mode]);
    case MapKind::Categorical: {
      const double rounded = std::nearbyint(x);
      if (!std::isfinite(x) || rounded != x || x < 0.0) {
        throw InputError("categorical feature " + std::to_string(mode) +
                         ": value " + std::to_string(x) + " is not a category index");
      }
      return map_categorical(static_cast<std::size_t>(rounded), local_dims[mode] - 1);
    }
  }
  throw InputError("feature map: unknown kind");
}

std::vector<Vector> FeatureMapSpec::map_row(std::span<const double> x) const {
  if (x.size() != local_dims.size()) {
    throw InputError("feature row has " + std::to_string(x.size()) +
                     " entries, model expects " + std::to_string(local_dims.size()));
  }
  std::vector<Vector> mapped;
  mapped.reserve(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) mapped.push_back(map(n, x[n]));
  return mapped;
}

Vector map_polynomial(double x, std::size_t d) {
  if (d < 2) throw InputError("map_polynomial: d must be at least 2");
  if (!std::isfinite(x)) throw InputError("map_polynomial: non-finite input");
  Vector out(d);
  double p = 1.0;
  for (std::size_t k = 0; k < d; ++k) {
    out[k] = p;
    p *= x;
  }
  if (!std::isfinite(out.back())) {
    throw NumericError("map_polynomial: power overflow at d=" + std::to_string(d));
  }
  return out;
}

Vector map_normalized_polynomial(double x, std::size_t d) {
  Vector out = map_polynomial(x, d);
  double sq = 0.0;
  for (double v : out) sq += v * v;
  if (!std::isfinite(sq)) {
    throw NumericError("map_normalized_polynomial: squared-sum overflow");
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : out) v *= inv;
  return out;
}

Vector map_categorical(std::size_t value_index, std::size_t cardinality) {
  if (value_index >= cardinality) {
    throw InputError("map_categorical: value index " + std::to_string(value_index) +
                     " out of range for cardinality " + std::to_string(cardinality));
  }
  Vector out(cardinality + 1, 0.0);
  out[0] = 1.0;
  out[1 + value_index] = 1.0;
  return out;
}

}  // namespace cplearn
