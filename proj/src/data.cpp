#include "cplearn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "cplearn/errors.hpp"

namespace cplearn {

namespace {

constexpr double kMinStd = 1e-12;

// One RFC-4180 record; handles quoted fields with "" escapes. Returns false
// at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int c;
  while ((c = in.get()) != EOF) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(static_cast<char>(c));
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      // swallow; LF handled below
    } else if (c == '\n') {
      ++line_no;
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(static_cast<char>(c));
    }
  }
  if (in_quotes) throw ParseError("csv: unterminated quoted field at end of file");
  if (!any) return false;
  fields.push_back(std::move(field));
  ++line_no;
  return true;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  if (begin == end) return false;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  // "inf"/"nan" tokens parse but are not usable values here.
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

Dataset take_rows(const Dataset& data, const std::vector<std::size_t>& indices,
                  std::size_t begin, std::size_t end) {
  Dataset out;
  out.schema = data.schema;
  out.target_name = data.target_name;
  out.rows.reserve(end - begin);
  out.targets.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    out.rows.push_back(data.rows[indices[i]]);
    out.targets.push_back(data.targets[indices[i]]);
  }
  return out;
}

}  // namespace

bool Dataset::all_dense() const {
  return std::all_of(schema.begin(), schema.end(),
                     [](const ColumnSchema& c) { return c.kind == ColumnKind::Dense; });
}

bool Dataset::all_categorical() const {
  return std::all_of(schema.begin(), schema.end(),
                     [](const ColumnSchema& c) { return c.kind == ColumnKind::Categorical; });
}

std::vector<std::size_t> Dataset::cardinalities() const {
  std::vector<std::size_t> out;
  out.reserve(schema.size());
  for (const auto& col : schema) {
    if (col.kind != ColumnKind::Categorical) {
      throw DataError("column '" + col.name + "' is not categorical");
    }
    out.push_back(col.cardinality());
  }
  return out;
}

namespace {

struct RawCsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> cells;
};

RawCsv read_csv_cells(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open csv file '" + path + "'");

  RawCsv raw;
  std::size_t line_no = 0;
  if (!read_record(in, raw.header, line_no)) {
    throw ParseError("csv '" + path + "': empty file");
  }
  if (raw.header.empty()) throw ParseError("csv '" + path + "': empty header");

  std::vector<std::string> record;
  while (read_record(in, record, line_no)) {
    if (record.size() == 1 && record[0].empty()) continue;  // trailing blank line
    if (record.size() != raw.header.size()) {
      throw ParseError("csv '" + path + "' line " + std::to_string(line_no) + ": " +
                       std::to_string(record.size()) + " fields, header has " +
                       std::to_string(raw.header.size()));
    }
    for (std::size_t c = 0; c < record.size(); ++c) {
      if (record[c].empty()) {
        throw ParseError("csv '" + path + "' line " + std::to_string(line_no) +
                         ": missing value in column '" + raw.header[c] + "'");
      }
    }
    raw.cells.push_back(record);
  }
  return raw;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::vector<std::string>& categorical_columns) {
  CsvReadOptions options;
  options.target_column = target_column;
  options.categorical_columns = categorical_columns;
  return load_csv(path, options);
}

Dataset load_csv(const std::string& path, const CsvReadOptions& options) {
  const RawCsv raw = read_csv_cells(path);
  const auto& header = raw.header;
  const auto& cells = raw.cells;
  if (cells.empty() && !options.allow_empty) {
    throw DataError("csv '" + path + "': no data rows");
  }

  std::size_t target_idx;
  if (options.target_column.empty()) {
    target_idx = header.size() - 1;
  } else {
    const auto it = std::find(header.begin(), header.end(), options.target_column);
    if (it == header.end()) {
      throw DataError("csv '" + path + "': no column named '" + options.target_column + "'");
    }
    target_idx = static_cast<std::size_t>(it - header.begin());
  }

  Dataset data;
  data.target_name = header[target_idx];

  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != target_idx) feature_cols.push_back(c);
  }

  auto forced_in = [&](const std::vector<std::string>& list, const std::string& name) {
    return std::find(list.begin(), list.end(), name) != list.end();
  };

  // Column kinds: forced by hint when given, otherwise dense iff every cell
  // parses as a float.
  std::vector<bool> is_categorical(feature_cols.size(), false);
  for (std::size_t f = 0; f < feature_cols.size(); ++f) {
    const std::size_t c = feature_cols[f];
    if (options.all_categorical || forced_in(options.categorical_columns, header[c])) {
      is_categorical[f] = true;
      continue;
    }
    if (options.all_dense || forced_in(options.dense_columns, header[c])) continue;
    for (const auto& row : cells) {
      double unused;
      if (!parse_double(row[c], unused)) {
        is_categorical[f] = true;
        break;
      }
    }
  }

  std::vector<std::unordered_map<std::string, std::size_t>> dictionaries(feature_cols.size());
  for (std::size_t f = 0; f < feature_cols.size(); ++f) {
    ColumnSchema col;
    col.name = header[feature_cols[f]];
    col.kind = is_categorical[f] ? ColumnKind::Categorical : ColumnKind::Dense;
    data.schema.push_back(std::move(col));
  }

  data.rows.reserve(cells.size());
  data.targets.reserve(cells.size());
  for (std::size_t r = 0; r < cells.size(); ++r) {
    std::vector<double> row(feature_cols.size());
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      const std::string& cell = cells[r][feature_cols[f]];
      if (is_categorical[f]) {
        auto& dict = dictionaries[f];
        auto [it, inserted] = dict.emplace(cell, dict.size());
        if (inserted) data.schema[f].dictionary.push_back(cell);
        row[f] = static_cast<double>(it->second);
      } else {
        double v;
        if (!parse_double(cell, v)) {
          throw ParseError("csv '" + path + "' row " + std::to_string(r + 2) +
                           ", column '" + data.schema[f].name + "': cannot parse '" +
                           cell + "' as a number");
        }
        row[f] = v;
      }
    }
    double target;
    if (!parse_double(cells[r][target_idx], target)) {
      throw ParseError("csv '" + path + "' row " + std::to_string(r + 2) +
                       ": cannot parse target '" + cells[r][target_idx] + "'");
    }
    data.rows.push_back(std::move(row));
    data.targets.push_back(target);
  }
  return data;
}

Dataset encode_csv_with_schema(const std::string& path,
                               const std::vector<ColumnSchema>& schema,
                               const std::optional<StandardizationStats>& stats,
                               const std::string& target_column, bool require_target) {
  const RawCsv raw = read_csv_cells(path);

  std::vector<std::size_t> feature_cols(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const auto it = std::find(raw.header.begin(), raw.header.end(), schema[f].name);
    if (it == raw.header.end()) {
      throw DataError("csv '" + path + "': missing feature column '" + schema[f].name + "'");
    }
    feature_cols[f] = static_cast<std::size_t>(it - raw.header.begin());
  }

  std::optional<std::size_t> target_idx;
  if (!target_column.empty()) {
    const auto it = std::find(raw.header.begin(), raw.header.end(), target_column);
    if (it != raw.header.end()) {
      target_idx = static_cast<std::size_t>(it - raw.header.begin());
    } else if (require_target) {
      throw DataError("csv '" + path + "': missing target column '" + target_column + "'");
    }
  } else if (require_target) {
    throw DataError("csv '" + path + "': no target column named");
  }

  Dataset data;
  data.schema = schema;
  data.target_name = target_column.empty() ? "target" : target_column;
  data.stats = stats;
  data.rows.reserve(raw.cells.size());
  data.targets.reserve(raw.cells.size());

  for (std::size_t r = 0; r < raw.cells.size(); ++r) {
    std::vector<double> row(schema.size());
    for (std::size_t f = 0; f < schema.size(); ++f) {
      const std::string& cell = raw.cells[r][feature_cols[f]];
      if (schema[f].kind == ColumnKind::Categorical) {
        const auto& dict = schema[f].dictionary;
        const auto it = std::find(dict.begin(), dict.end(), cell);
        if (it == dict.end()) {
          throw DataError("csv '" + path + "' row " + std::to_string(r + 2) + ", column '" +
                          schema[f].name + "': unseen category '" + cell + "'");
        }
        row[f] = static_cast<double>(it - dict.begin());
      } else {
        double v;
        if (!parse_double(cell, v)) {
          throw ParseError("csv '" + path + "' row " + std::to_string(r + 2) +
                           ", column '" + schema[f].name + "': cannot parse '" + cell +
                           "' as a number");
        }
        if (stats) v = (v - stats->mean[f]) / stats->stddev[f];
        row[f] = v;
      }
    }
    double target = 0.0;
    if (target_idx) {
      if (!parse_double(raw.cells[r][*target_idx], target)) {
        throw ParseError("csv '" + path + "' row " + std::to_string(r + 2) +
                         ": cannot parse target '" + raw.cells[r][*target_idx] + "'");
      }
    }
    data.rows.push_back(std::move(row));
    data.targets.push_back(target);
  }
  return data;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  for (const auto& col : data.schema) out << quote_field(col.name) << ',';
  out << quote_field(data.target_name) << '\n';
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    for (std::size_t f = 0; f < data.schema.size(); ++f) {
      if (data.schema[f].kind == ColumnKind::Categorical) {
        out << quote_field(
            data.schema[f].dictionary.at(static_cast<std::size_t>(data.rows[r][f])));
      } else {
        out << format_double(data.rows[r][f]);
      }
      out << ',';
    }
    out << format_double(data.targets[r]) << '\n';
  }
  if (!out) throw InputError("failed writing '" + path + "'");
}

StandardizationStats standardize_fit(const Dataset& train) {
  if (train.rows.empty()) throw DataError("standardize: empty dataset");
  const std::size_t n_feat = train.feature_count();
  StandardizationStats stats;
  stats.mean.assign(n_feat, 0.0);
  stats.stddev.assign(n_feat, 1.0);
  const double n = static_cast<double>(train.rows.size());
  for (std::size_t f = 0; f < n_feat; ++f) {
    if (train.schema[f].kind != ColumnKind::Dense) continue;
    double mean = 0.0;
    for (const auto& row : train.rows) mean += row[f];
    mean /= n;
    double var = 0.0;
    for (const auto& row : train.rows) {
      const double d = row[f] - mean;
      var += d * d;
    }
    const double stddev = std::sqrt(var / n);  // population std
    if (stddev <= kMinStd) {
      throw DataError("standardize: column '" + train.schema[f].name +
                      "' is constant on the training split");
    }
    stats.mean[f] = mean;
    stats.stddev[f] = stddev;
  }
  return stats;
}

Dataset standardize_apply(const StandardizationStats& stats, const Dataset& data) {
  if (stats.mean.size() != data.feature_count()) {
    throw DataError("standardize: stats cover " + std::to_string(stats.mean.size()) +
                    " features, dataset has " + std::to_string(data.feature_count()));
  }
  Dataset out = data;
  for (auto& row : out.rows) {
    for (std::size_t f = 0; f < row.size(); ++f) {
      if (out.schema[f].kind != ColumnKind::Dense) continue;
      row[f] = (row[f] - stats.mean[f]) / stats.stddev[f];
    }
  }
  out.stats = stats;
  return out;
}

SyntheticDataset generate_synthetic_poly(std::size_t n_samples, std::size_t informative,
                                         std::size_t noise_features, double noise_std,
                                         std::uint64_t seed, int degree) {
  if (n_samples < 1 || informative < 1) {
    throw InputError("generate_synthetic_poly: counts must be at least 1");
  }
  if (degree < 1 || degree > 2) {
    throw InputError("generate_synthetic_poly: degree must be 1 or 2");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);

  SyntheticCoefficients c;
  c.bias = coeff(rng);
  c.linear.resize(informative);
  for (auto& w : c.linear) w = coeff(rng);
  c.pairwise.assign(informative, std::vector<double>(informative, 0.0));
  if (degree >= 2) {
    for (std::size_t i = 0; i < informative; ++i) {
      for (std::size_t j = i; j < informative; ++j) c.pairwise[i][j] = coeff(rng);
    }
  }

  const std::size_t n_feat = informative + noise_features;
  Dataset data;
  data.schema.resize(n_feat);
  for (std::size_t f = 0; f < n_feat; ++f) {
    data.schema[f].name = "x" + std::to_string(f + 1);
    data.schema[f].kind = ColumnKind::Dense;
  }
  data.target_name = "y";
  data.rows.reserve(n_samples);
  data.targets.reserve(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    std::vector<double> row(n_feat);
    for (auto& v : row) v = gauss(rng);
    double y = c.bias;
    for (std::size_t i = 0; i < informative; ++i) {
      y += c.linear[i] * row[i];
      for (std::size_t j = i; j < informative; ++j) y += c.pairwise[i][j] * row[i] * row[j];
    }
    y += noise_std * gauss(rng);
    data.rows.push_back(std::move(row));
    data.targets.push_back(y);
  }
  return SyntheticDataset{std::move(data), std::move(c), noise_std};
}

SplitDataset split(const Dataset& data, const SplitSpec& spec) {
  if (spec.test_fraction <= 0.0 || spec.test_fraction >= 1.0 ||
      spec.validation_fraction <= 0.0 || spec.validation_fraction >= 1.0) {
    throw ConfigError("split: fractions must lie in (0, 1)");
  }
  const std::size_t n = data.size();
  std::vector<std::size_t> indices(n);
  std::iota(indices.begin(), indices.end(), 0);
  std::mt19937_64 rng(spec.seed);
  std::shuffle(indices.begin(), indices.end(), rng);

  const auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * n));
  const auto n_val = static_cast<std::size_t>(
      std::llround(spec.validation_fraction * static_cast<double>(n - n_test)));
  if (n_test == 0 || n_val == 0 || n_test + n_val >= n) {
    throw ConfigError("split: fractions leave an empty split for " + std::to_string(n) +
                      " rows");
  }

  SplitDataset out;
  out.test = take_rows(data, indices, 0, n_test);
  out.validation = take_rows(data, indices, n_test, n_test + n_val);
  out.train = take_rows(data, indices, n_test + n_val, n);
  return out;
}

}  // namespace cplearn
