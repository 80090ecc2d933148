#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cplearn/feature_map.hpp"

namespace cplearn {

enum class ColumnKind { Dense, Categorical };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::Dense;
  // Categorical only: dictionary in first-appearance order; cardinality is
  // dictionary.size().
  std::vector<std::string> dictionary;

  std::size_t cardinality() const { return dictionary.size(); }
};

struct StandardizationStats {
  // One (mean, std) pair per feature; categorical features keep (0, 1) and
  // are passed through untouched.
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// In-memory dataset: rows hold dense values as-is and categorical values as
/// their dictionary index (stored as an integral double).
struct Dataset {
  std::vector<ColumnSchema> schema;
  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  std::string target_name = "target";
  std::optional<StandardizationStats> stats;

  std::size_t size() const { return rows.size(); }
  std::size_t feature_count() const { return schema.size(); }

  bool all_dense() const;
  bool all_categorical() const;

  /// Cardinalities of all (categorical) columns, for building a map spec.
  std::vector<std::size_t> cardinalities() const;
};

struct SplitSpec {
  double test_fraction = 0.2;
  double validation_fraction = 0.2;  // of the remainder after the test cut
  std::uint64_t seed = 0;
};

struct SplitDataset {
  Dataset train;
  Dataset validation;
  Dataset test;
};

struct CsvReadOptions {
  std::string target_column;  // empty selects the last column
  std::vector<std::string> categorical_columns;
  std::vector<std::string> dense_columns;
  bool all_categorical = false;  // force every feature column categorical
  bool all_dense = false;        // force every feature column dense
  bool allow_empty = false;      // header-only files produce an empty dataset
};

/// Parse an RFC-4180-style CSV with a mandatory header row. Columns are
/// dense when every value parses as a float and categorical otherwise;
/// either can be forced per column through the options. Categorical values
/// are dictionary-encoded in first-appearance order; missing values are
/// rejected.
Dataset load_csv(const std::string& path, const CsvReadOptions& options = {});

Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::vector<std::string>& categorical_columns = {});

/// Re-encode a CSV against an existing schema (the inference path): feature
/// columns are matched by name, categorical cells must already be in the
/// dictionary, dense cells are standardized with the supplied stats. The
/// target column may be absent unless `require_target` is set.
Dataset encode_csv_with_schema(const std::string& path,
                               const std::vector<ColumnSchema>& schema,
                               const std::optional<StandardizationStats>& stats,
                               const std::string& target_column, bool require_target);

void save_csv(const Dataset& data, const std::string& path);

/// Mean/population-std per dense feature, computed from the given rows only.
StandardizationStats standardize_fit(const Dataset& train);

/// (x - mean) / std per dense feature, with stats taken from the training
/// split; records the stats on the returned dataset.
Dataset standardize_apply(const StandardizationStats& stats, const Dataset& data);

struct SyntheticCoefficients {
  double bias = 0.0;
  std::vector<double> linear;                           // informative features
  std::vector<std::vector<double>> pairwise;            // i <= j, includes squares
};

struct SyntheticDataset {
  Dataset data;
  SyntheticCoefficients coefficients;
  double noise_std = 0.0;
};

/// Regression task with standard-normal features: the target is a fixed
/// random 2nd-order polynomial (bias + linear + pairwise terms i <= j,
/// squares included, coefficients uniform in [-1, 1]) of the first
/// `informative` features plus Gaussian noise; the remaining
/// `noise_features` features carry no signal. degree=1 drops the pairwise
/// terms for a purely linear target.
SyntheticDataset generate_synthetic_poly(std::size_t n_samples, std::size_t informative,
                                         std::size_t noise_features, double noise_std,
                                         std::uint64_t seed, int degree = 2);

/// Shuffle (seed-deterministic), then cut test and validation splits.
SplitDataset split(const Dataset& data, const SplitSpec& spec);

}  // namespace cplearn
