#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "cplearn/errors.hpp"

namespace cplearn {

using Vector = std::vector<double>;

/// Dense row-major matrix of 64-bit floats. The only matrix type used in
/// the library; factor matrices, gram matrices and gradients are all plain
/// Matrix values.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// View of row i as a contiguous span of length cols().
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }
  std::span<double> row(std::size_t i) {
    return std::span<double>(data_).subspan(i * cols_, cols_);
  }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Dense order-N tensor with first-index-fastest linearization: the multi
/// index (i_1,...,i_N) maps to i_1 + I_1*(i_2 + I_2*(i_3 + ...)). Guarded by
/// an entry budget so that a d^N weight tensor can only be materialized at
/// desk scale.
class DenseTensor {
 public:
  static constexpr std::size_t kMaxEntries = 10'000'000;

  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::size_t> dims);

  std::size_t order() const { return dims_.size(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }

  std::size_t linear_index(std::span<const std::size_t> idx) const;

  double& at(std::span<const std::size_t> idx) { return data_[linear_index(idx)]; }
  double at(std::span<const std::size_t> idx) const { return data_[linear_index(idx)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> data_;
};

/// Elementwise product of two equally shaped matrices.
Matrix hadamard(const Matrix& a, const Matrix& b);

/// Elementwise product of two equally shaped tensors.
DenseTensor hadamard(const DenseTensor& a, const DenseTensor& b);

/// Elementwise product of two equal-length vectors.
Vector hadamard(const Vector& a, const Vector& b);

/// Column-wise Kronecker product: a (I x R) with b (K x R) gives an
/// (I*K x R) matrix whose column r is kron(a_r, b_r), i.e. entry
/// (i*K + k, r) = a(i,r) * b(k,r).
Matrix khatri_rao(const Matrix& a, const Matrix& b);

/// Rank-1 tensor with entry (i_1,...,i_N) = prod_k v_k[i_k]. Throws
/// CapacityError above the DenseTensor entry budget.
DenseTensor outer_product_chain(const std::vector<Vector>& vectors);

Matrix matmul(const Matrix& a, const Matrix& b);

/// a^T * b without forming the transpose.
Matrix gram(const Matrix& a, const Matrix& b);

/// Row vector x^T * A, returned as a plain vector of length A.cols().
Vector vec_mat(const Vector& x, const Matrix& a);

double inner(const DenseTensor& a, const DenseTensor& b);
double sum(const Vector& v);
double sum(const Matrix& m);
double frobenius_norm(const Matrix& m);
double norm(const Vector& v);

/// Rank-1 update target: x * y^T as a fresh (x.size() x y.size()) matrix.
Matrix outer(const Vector& x, const Vector& y);

/// Solve A w = rhs for square A by Gaussian elimination with partial
/// pivoting. Throws NumericError when a pivot falls below 1e-300.
Vector solve_linear_system(Matrix a, Vector rhs);

}  // namespace cplearn
