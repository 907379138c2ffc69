#pragma once
// Eigen conversions for oracle checks.
#include <Eigen/Dense>

#include "snla/matrix.hpp"

namespace oracle {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

inline Mat to_eigen(const snla::DenseMatrix& a) {
  Mat m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  return m;
}

inline Vec to_eigen(const snla::Vector& v) { return Eigen::Map<const Vec>(v.data(), Eigen::Index(v.size())); }

inline snla::DenseMatrix from_eigen(const Mat& m) {
  snla::DenseMatrix a(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a(i, j) = m(i, j);
  return a;
}

inline Vec singular_values(const snla::DenseMatrix& a) { return Eigen::JacobiSVD<Mat>(to_eigen(a)).singularValues(); }

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace oracle
