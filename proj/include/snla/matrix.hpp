#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "snla/error.hpp"

namespace snla {

using Vector = std::vector<double>;

// Row-major dense matrix. Entries are checked finite when built from caller data.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diag(std::span<const double> d);
  static DenseMatrix column(std::span<const double> v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
  const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }
  std::span<const double> row(std::size_t i) const { return {row_ptr(i), cols_}; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Vector col(std::size_t j) const;
  void set_col(std::size_t j, std::span<const double> v);

  DenseMatrix transpose() const;
  DenseMatrix cols_range(std::size_t j0, std::size_t j1) const;
  DenseMatrix rows_range(std::size_t i0, std::size_t i1) const;
  DenseMatrix select_rows(std::span<const std::size_t> idx) const;
  DenseMatrix select_cols(std::span<const std::size_t> idx) const;

  double frobenius() const;
  double frobenius_sq() const;
  double max_abs() const;
  bool all_finite() const;

  DenseMatrix& operator+=(const DenseMatrix& o);
  DenseMatrix& operator-=(const DenseMatrix& o);
  DenseMatrix& operator*=(double s);

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(DenseMatrix a, double s);

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// aᵀ·b without forming the transpose
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
// a·bᵀ
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
Vector matvec(const DenseMatrix& a, std::span<const double> x);
Vector matvec_t(const DenseMatrix& a, std::span<const double> x);

DenseMatrix hcat(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix vcat(const DenseMatrix& a, const DenseMatrix& b);

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

// Sorted, deduplicated COO held as CSR.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  // Duplicates are summed; exact zeros dropped.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> t);
  static SparseMatrix from_dense(const DenseMatrix& a);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<std::size_t>& row_start() const { return row_start_; }
  const std::vector<std::size_t>& col_index() const { return col_index_; }
  const std::vector<double>& values() const { return values_; }

  std::vector<Triplet> triplets() const;
  DenseMatrix to_dense() const;
  SparseMatrix transpose() const;
  double frobenius() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<std::size_t> row_start_{0};
  std::vector<std::size_t> col_index_;
  std::vector<double> values_;
};

DenseMatrix matmul(const SparseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_tn(const SparseMatrix& a, const DenseMatrix& b);
SparseMatrix matmul(const SparseMatrix& a, const SparseMatrix& b);
Vector matvec(const SparseMatrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm1(std::span<const double> a);
double norm_inf(std::span<const double> a);

}  // namespace snla
