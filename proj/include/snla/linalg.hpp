#pragma once

#include <optional>

#include "snla/matrix.hpp"

namespace snla {

struct SvdResult {
  DenseMatrix U;   // n×ρ
  Vector sigma;    // ρ, non-increasing, positive
  DenseMatrix Vt;  // ρ×d
  std::size_t rank = 0;
};

struct QrResult {
  DenseMatrix Q;  // m×n, orthonormal columns
  DenseMatrix R;  // n×n upper triangular
  bool rank_deficient = false;
};

struct EigResult {
  Vector values;        // ascending
  DenseMatrix vectors;  // columns are eigenvectors
};

// Negative rank_tol selects 1e-10·max(rows, cols).
constexpr double kDefaultRankTol = -1.0;
double default_rank_tol(std::size_t rows, std::size_t cols);

// One-sided Jacobi. Singular values ≤ rank_tol·σ_max are dropped.
SvdResult svd(const DenseMatrix& a, double rank_tol = kDefaultRankTol);
// All min(m, n) singular values including zeros, non-increasing.
Vector singular_values(const DenseMatrix& a);
DenseMatrix pinv(const DenseMatrix& a, double rank_tol = kDefaultRankTol);
// Householder; requires rows ≥ cols.
QrResult qr(const DenseMatrix& a);
// Cyclic Jacobi for symmetric input.
EigResult sym_eig(const DenseMatrix& a);

std::size_t numerical_rank(const DenseMatrix& a, double rank_tol = kDefaultRankTol);
double spectral_norm(const DenseMatrix& a);
// Orthonormal basis for the column space.
DenseMatrix orth(const DenseMatrix& a, double rank_tol = kDefaultRankTol);
DenseMatrix upper_triangular_inverse(const DenseMatrix& r);
// Gaussian elimination with partial pivoting; nullopt when singular.
std::optional<Vector> solve_square(const DenseMatrix& a, std::span<const double> b);
// ‖A − A_k‖ in the Frobenius (false) or spectral (true) norm.
double tail_norm(const DenseMatrix& a, std::size_t k, bool spectral);

// Streams rows of a tall matrix into an R factor by Givens rotations, so
// spectral norms of residuals can be taken without keeping the residual.
class RowAccumulator {
 public:
  explicit RowAccumulator(std::size_t cols);
  void add_row(std::span<const double> row);
  double frobenius_sq() const { return fro_sq_; }
  double spectral_norm() const;

 private:
  std::size_t n_;
  DenseMatrix r_;
  double fro_sq_ = 0;
};

}  // namespace snla
