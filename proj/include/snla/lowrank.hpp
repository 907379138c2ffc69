#pragma once

#include "snla/matrix.hpp"

namespace snla {

// A ≈ L·U·R; R has orthonormal rows.
struct FactoredLowRank {
  DenseMatrix L;  // n×k′
  DenseMatrix U;  // k′×k″
  DenseMatrix R;  // k″×d
  std::size_t k = 0;

  DenseMatrix dense() const;
};

// [A·Utᵀ]_k·Ut; rows of Ut must be orthonormal.
FactoredLowRank best_rank_k_in_rowspace(const DenseMatrix& a, const DenseMatrix& ut, std::size_t k);

std::size_t lowrank_left_rows(std::size_t k, double eps);
FactoredLowRank frobenius_lowrank(const DenseMatrix& a, std::size_t k, double eps, std::uint64_t seed);

struct PowerResult {
  DenseMatrix Z;  // n×k orthonormal columns
  FactoredLowRank approx;  // Z·I·(ZᵀA)
  std::size_t q = 0;
};

std::size_t power_iterations(std::size_t m, std::size_t n, double eps);
PowerResult spectral_lowrank_power(const DenseMatrix& a, std::size_t k, double eps, std::uint64_t seed);
PowerResult spectral_lowrank_power_q(const DenseMatrix& a, std::size_t k, std::size_t q, std::uint64_t seed);

// ‖A − ZZᵀA‖ without forming ZZᵀA
double project_residual_norm(const DenseMatrix& a, const DenseMatrix& z, bool spectral);
// ‖A − LUR‖, streamed the same way
double residual_norm(const DenseMatrix& a, const FactoredLowRank& f, bool spectral);

}  // namespace snla
