#include "cplearn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cplearn {

namespace {

std::string shape_str(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) {
      throw DimensionError("from_rows: ragged initializer, row " + std::to_string(i) +
                           " has " + std::to_string(row.size()) + " entries, expected " +
                           std::to_string(c));
    }
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

DenseTensor::DenseTensor(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  std::size_t total = 1;
  for (std::size_t d : dims_) {
    if (d == 0) throw DimensionError("DenseTensor: zero-sized mode");
    if (total > kMaxEntries / d) {
      throw CapacityError("DenseTensor: entry count exceeds the 1e7 budget");
    }
    total *= d;
  }
  data_.assign(total, 0.0);
}

std::size_t DenseTensor::linear_index(std::span<const std::size_t> idx) const {
  if (idx.size() != dims_.size()) {
    throw DimensionError("DenseTensor: index order " + std::to_string(idx.size()) +
                         " does not match tensor order " + std::to_string(dims_.size()));
  }
  // First index fastest: i_1 + I_1*(i_2 + I_2*(i_3 + ...)).
  std::size_t lin = 0;
  for (std::size_t n = dims_.size(); n-- > 0;) {
    if (idx[n] >= dims_[n]) {
      throw InputError("DenseTensor: index " + std::to_string(idx[n]) +
                       " out of range for mode of size " + std::to_string(dims_[n]));
    }
    lin = lin * dims_[n] + idx[n];
  }
  return lin;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("hadamard: shape mismatch " + shape_str(a.rows(), a.cols()) +
                         " vs " + shape_str(b.rows(), b.cols()));
  }
  Matrix out(a.rows(), a.cols());
  const auto av = a.data();
  const auto bv = b.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < av.size(); ++i) ov[i] = av[i] * bv[i];
  return out;
}

DenseTensor hadamard(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims()) throw DimensionError("hadamard: tensor dims mismatch");
  DenseTensor out(a.dims());
  const auto av = a.data();
  const auto bv = b.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < av.size(); ++i) ov[i] = av[i] * bv[i];
  return out;
}

Vector hadamard(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionError("hadamard: vector length mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("khatri_rao: column counts differ, " + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.cols()));
  }
  const std::size_t r = a.cols();
  Matrix out(a.rows() * b.rows(), r);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < b.rows(); ++k) {
      const std::size_t row = i * b.rows() + k;
      for (std::size_t c = 0; c < r; ++c) out(row, c) = a(i, c) * b(k, c);
    }
  }
  return out;
}

DenseTensor outer_product_chain(const std::vector<Vector>& vectors) {
  if (vectors.empty()) throw InputError("outer_product_chain: no vectors given");
  std::vector<std::size_t> dims;
  dims.reserve(vectors.size());
  for (const auto& v : vectors) dims.push_back(v.size());
  DenseTensor out(std::move(dims));  // CapacityError if over budget

  // Fill in linearization order; the first mode cycles fastest.
  auto data = out.data();
  std::vector<std::size_t> idx(vectors.size(), 0);
  for (std::size_t lin = 0; lin < data.size(); ++lin) {
    double p = 1.0;
    for (std::size_t n = 0; n < vectors.size(); ++n) p *= vectors[n][idx[n]];
    data[lin] = p;
    for (std::size_t n = 0; n < vectors.size(); ++n) {
      if (++idx[n] < vectors[n].size()) break;
      idx[n] = 0;
    }
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dims differ, " + shape_str(a.rows(), a.cols()) +
                         " * " + shape_str(b.rows(), b.cols()));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Matrix gram(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("gram: row counts differ, " + std::to_string(a.rows()) + " vs " +
                         std::to_string(b.rows()));
  }
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aki * b(k, j);
    }
  }
  return out;
}

Vector vec_mat(const Vector& x, const Matrix& a) {
  if (x.size() != a.rows()) {
    throw DimensionError("vec_mat: vector length " + std::to_string(x.size()) +
                         " does not match matrix rows " + std::to_string(a.rows()));
  }
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const auto row = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += xi * row[j];
  }
  return out;
}

double inner(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims()) throw DimensionError("inner: tensor dims mismatch");
  const auto av = a.data();
  const auto bv = b.data();
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  return s;
}

double sum(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double sum(const Matrix& m) {
  double s = 0.0;
  for (double x : m.data()) s += x;
  return s;
}

double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double x : m.data()) s += x * x;
  return std::sqrt(s);
}

double norm(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Matrix outer(const Vector& x, const Vector& y) {
  Matrix out(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) out(i, j) = x[i] * y[j];
  return out;
}

Vector solve_linear_system(Matrix a, Vector rhs) {
  const std::size_t n = a.rows();
  if (a.cols() != n || rhs.size() != n) {
    throw DimensionError("solve_linear_system: system is not square");
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t i = col + 1; i < n; ++i) {
      if (std::abs(a(i, col)) > std::abs(a(pivot, col))) pivot = i;
    }
    if (std::abs(a(pivot, col)) < 1e-300) {
      throw NumericError("solve_linear_system: singular system at column " +
                         std::to_string(col));
    }
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
      std::swap(rhs[col], rhs[pivot]);
    }
    for (std::size_t i = col + 1; i < n; ++i) {
      const double f = a(i, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(col, j);
      rhs[i] -= f * rhs[col];
    }
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

}  // namespace cplearn
