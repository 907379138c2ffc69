#include "snla/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace snla {

namespace {

std::string dims(std::size_t r, std::size_t c) { return std::to_string(r) + "x" + std::to_string(c); }

void check_same(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::DimensionMismatch,
          std::string(op) + ": " + dims(a.rows(), a.cols()) + " vs " + dims(b.rows(), b.cols()));
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows_ * cols_, ErrorCode::DimensionMismatch,
          "dense data length " + std::to_string(data_.size()) + " does not match " + dims(rows_, cols_));
  require(all_finite(), ErrorCode::InvalidArgument, "dense matrix contains NaN or Inf");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diag(std::span<const double> d) {
  DenseMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

DenseMatrix DenseMatrix::column(std::span<const double> v) {
  return DenseMatrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

Vector DenseMatrix::col(std::size_t j) const {
  Vector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

void DenseMatrix::set_col(std::size_t j, std::span<const double> v) {
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

DenseMatrix DenseMatrix::cols_range(std::size_t j0, std::size_t j1) const {
  DenseMatrix m(rows_, j1 - j0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = j0; j < j1; ++j) m(i, j - j0) = (*this)(i, j);
  return m;
}

DenseMatrix DenseMatrix::rows_range(std::size_t i0, std::size_t i1) const {
  DenseMatrix m(i1 - i0, cols_);
  std::copy(row_ptr(i0), row_ptr(i0) + (i1 - i0) * cols_, m.row_ptr(0));
  return m;
}

DenseMatrix DenseMatrix::select_rows(std::span<const std::size_t> idx) const {
  DenseMatrix m(idx.size(), cols_);
  for (std::size_t r = 0; r < idx.size(); ++r) std::copy(row_ptr(idx[r]), row_ptr(idx[r]) + cols_, m.row_ptr(r));
  return m;
}

DenseMatrix DenseMatrix::select_cols(std::span<const std::size_t> idx) const {
  DenseMatrix m(rows_, idx.size());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t c = 0; c < idx.size(); ++c) m(i, c) = (*this)(i, idx[c]);
  return m;
}

double DenseMatrix::frobenius_sq() const {
  double s = 0;
  for (double v : data_) s += v * v;
  return s;
}

double DenseMatrix::frobenius() const { return std::sqrt(frobenius_sq()); }

double DenseMatrix::max_abs() const {
  double m = 0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool DenseMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& o) {
  check_same(*this, o, "add");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& o) {
  check_same(*this, o, "subtract");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
DenseMatrix operator*(DenseMatrix a, double s) { return a *= s; }

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), ErrorCode::DimensionMismatch,
          "matmul: " + dims(a.rows(), a.cols()) + " * " + dims(b.rows(), b.cols()));
  DenseMatrix c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row_ptr(i);
    const double* ai = a.row_ptr(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = b.row_ptr(k);
      for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows(), ErrorCode::DimensionMismatch,
          "matmul_tn: " + dims(a.rows(), a.cols()) + "^T * " + dims(b.rows(), b.cols()));
  DenseMatrix c(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* ak = a.row_ptr(k);
    const double* bk = b.row_ptr(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      double* ci = c.row_ptr(i);
      for (std::size_t j = 0; j < n; ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.cols(), ErrorCode::DimensionMismatch,
          "matmul_nt: " + dims(a.rows(), a.cols()) + " * " + dims(b.rows(), b.cols()) + "^T");
  DenseMatrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = dot(a.row(i), b.row(j));
  return c;
}

Vector matvec(const DenseMatrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), ErrorCode::DimensionMismatch, "matvec: " + dims(a.rows(), a.cols()));
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Vector matvec_t(const DenseMatrix& a, std::span<const double> x) {
  require(a.rows() == x.size(), ErrorCode::DimensionMismatch, "matvec_t: " + dims(a.rows(), a.cols()));
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row_ptr(i);
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += ai[j] * x[i];
  }
  return y;
}

DenseMatrix hcat(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.empty() && a.rows() == 0) return b;
  require(a.rows() == b.rows(), ErrorCode::DimensionMismatch, "hcat row mismatch");
  DenseMatrix m(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::copy(a.row_ptr(i), a.row_ptr(i) + a.cols(), m.row_ptr(i));
    std::copy(b.row_ptr(i), b.row_ptr(i) + b.cols(), m.row_ptr(i) + a.cols());
  }
  return m;
}

DenseMatrix vcat(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() == 0) return b;
  require(a.cols() == b.cols(), ErrorCode::DimensionMismatch, "vcat column mismatch");
  std::vector<double> d(a.data());
  d.insert(d.end(), b.data().begin(), b.data().end());
  DenseMatrix m(a.rows() + b.rows(), a.cols());
  m.data() = std::move(d);
  return m;
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> t) {
  for (const auto& e : t) {
    require(e.row < rows && e.col < cols, ErrorCode::InvalidArgument,
            "triplet (" + std::to_string(e.row) + "," + std::to_string(e.col) + ") outside " + dims(rows, cols));
    require(std::isfinite(e.value), ErrorCode::InvalidArgument, "sparse matrix contains NaN or Inf");
  }
  std::stable_sort(t.begin(), t.end(),
                   [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_start_.assign(rows + 1, 0);
  for (std::size_t i = 0; i < t.size();) {
    std::size_t j = i;
    double v = 0;
    while (j < t.size() && t[j].row == t[i].row && t[j].col == t[i].col) v += t[j++].value;
    if (v != 0.0) {
      m.col_index_.push_back(t[i].col);
      m.values_.push_back(v);
      ++m.row_start_[t[i].row + 1];
    }
    i = j;
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_start_[r + 1] += m.row_start_[r];
  return m;
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& a) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (a(i, j) != 0.0) t.push_back({i, j, a(i, j)});
  return from_triplets(a.rows(), a.cols(), std::move(t));
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t p = row_start_[r]; p < row_start_[r + 1]; ++p) t.push_back({r, col_index_[p], values_[p]});
  return t;
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t p = row_start_[r]; p < row_start_[r + 1]; ++p) d(r, col_index_[p]) = values_[p];
  return d;
}

SparseMatrix SparseMatrix::transpose() const {
  auto t = triplets();
  for (auto& e : t) std::swap(e.row, e.col);
  return from_triplets(cols_, rows_, std::move(t));
}

double SparseMatrix::frobenius() const {
  double s = 0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

DenseMatrix matmul(const SparseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), ErrorCode::DimensionMismatch, "sparse matmul dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  const auto& rs = a.row_start();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double* cr = c.row_ptr(r);
    for (std::size_t p = rs[r]; p < rs[r + 1]; ++p) {
      const double v = a.values()[p];
      const double* br = b.row_ptr(a.col_index()[p]);
      for (std::size_t j = 0; j < b.cols(); ++j) cr[j] += v * br[j];
    }
  }
  return c;
}

DenseMatrix matmul_tn(const SparseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows(), ErrorCode::DimensionMismatch, "sparse matmul_tn dimension mismatch");
  DenseMatrix c(a.cols(), b.cols());
  const auto& rs = a.row_start();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* br = b.row_ptr(r);
    for (std::size_t p = rs[r]; p < rs[r + 1]; ++p) {
      const double v = a.values()[p];
      double* cr = c.row_ptr(a.col_index()[p]);
      for (std::size_t j = 0; j < b.cols(); ++j) cr[j] += v * br[j];
    }
  }
  return c;
}

SparseMatrix matmul(const SparseMatrix& a, const SparseMatrix& b) {
  require(a.cols() == b.rows(), ErrorCode::DimensionMismatch, "sparse product dimension mismatch");
  std::vector<Triplet> t;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t p = a.row_start()[r]; p < a.row_start()[r + 1]; ++p) {
      const std::size_t k = a.col_index()[p];
      for (std::size_t q = b.row_start()[k]; q < b.row_start()[k + 1]; ++q)
        t.push_back({r, b.col_index()[q], a.values()[p] * b.values()[q]});
    }
  return SparseMatrix::from_triplets(a.rows(), b.cols(), std::move(t));
}

Vector matvec(const SparseMatrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), ErrorCode::DimensionMismatch, "sparse matvec dimension mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t p = a.row_start()[r]; p < a.row_start()[r + 1]; ++p) y[r] += a.values()[p] * x[a.col_index()[p]];
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm1(std::span<const double> a) {
  double s = 0;
  for (double v : a) s += std::abs(v);
  return s;
}

double norm_inf(std::span<const double> a) {
  double s = 0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

}  // namespace snla
