#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cplearn/cp_model.hpp"
#include "cplearn/feature_map.hpp"
#include "cplearn/linalg.hpp"

namespace cplearn::testing {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double rel_err(double got, double want) {
  return std::abs(got - want) / (1.0 + std::abs(want));
}

inline Matrix random_matrix(std::mt19937_64& gen, std::size_t rows, std::size_t cols,
                            double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = gauss(gen);
  return m;
}

inline Vector random_vector(std::mt19937_64& gen, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Vector v(n);
  for (double& x : v) x = gauss(gen);
  return v;
}

inline CpModel random_model(std::mt19937_64& gen, const FeatureMapSpec& spec,
                            std::size_t rank, double scale = 1.0) {
  CpModel model;
  model.map_spec = spec;
  model.rank = rank;
  for (std::size_t d : spec.local_dims) model.factors.push_back(random_matrix(gen, d, rank, scale));
  return model;
}

/// Raw feature row compatible with the map spec: standard normal draws for
/// polynomial kinds, uniform category indices for the categorical kind.
inline std::vector<double> random_row(std::mt19937_64& gen, const FeatureMapSpec& spec) {
  std::vector<double> x(spec.feature_count());
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    if (spec.kind == MapKind::Categorical) {
      std::uniform_int_distribution<std::size_t> pick(0, spec.local_dims[n] - 2);
      x[n] = static_cast<double>(pick(gen));
    } else {
      x[n] = gauss(gen);
    }
  }
  return x;
}

/// Kronecker product of two column vectors, the brute-force reference for
/// khatri_rao columns.
inline Vector kron(const Vector& a, const Vector& b) {
  Vector out;
  out.reserve(a.size() * b.size());
  for (double av : a)
    for (double bv : b) out.push_back(av * bv);
  return out;
}

}  // namespace cplearn::testing
