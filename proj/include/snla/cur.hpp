#pragma once

#include "snla/matrix.hpp"

namespace snla {

struct BssWeights {
  Vector s;  // one weight per input vector, at most r nonzero
  std::size_t r = 0;
  std::size_t k = 0;
  // per greedy step τ = 0..r−1
  Vector lower;    // L_τ
  Vector upper;    // U_τ
  Vector phi;      // φ(L_τ, M_τ)
  Vector trace_w;  // Tr(W_τ)
  // exit values after the final rescale
  double lambda_k = 0;     // λ_k(Σ s_i v_i v_iᵀ)
  double frob_mass = 0;    // Σ s_i ‖a_i‖²
  double frob_total = 0;   // Σ ‖a_i‖²

  std::size_t nonzeros() const;
};

// Rows of v are the v_i (Σ v_i v_iᵀ = I_k); rows of avecs are the a_i.
BssWeights bss_sampling(const DenseMatrix& v, const DenseMatrix& avecs, std::size_t r);
// Same, after compressing each a_i with a sparse embedding of min(n²/ε², ℓ) rows.
BssWeights bss_sampling_sparse(const DenseMatrix& v, const DenseMatrix& avecs, std::size_t r, double eps,
                               std::uint64_t seed);

// c₂ i.i.d. column draws ∝ estimated ‖(A − VV†A)_{*i}‖²; empty when V spans A.
std::vector<std::size_t> adaptive_cols(const DenseMatrix& a, const DenseMatrix& v, double alpha, std::size_t c2,
                                       std::uint64_t seed);
// Same draw with residual A − C₁C₁†A, after checking rank(R) = rank(AR†R).
std::vector<std::size_t> adaptive_cols_residual(const DenseMatrix& a, const DenseMatrix& rrows, const DenseMatrix& c1,
                                                double alpha, std::size_t c2, std::uint64_t seed);
// Column probabilities ∝ ‖(G·B)_{*i}‖² with G of N(0, 1/t) entries.
Vector length_squares_estimate(const DenseMatrix& b, std::uint64_t seed);

struct CurResult {
  DenseMatrix C;
  std::vector<std::size_t> col_indices;
  Vector col_scales;
  DenseMatrix U;
  DenseMatrix R;
  std::vector<std::size_t> row_indices;
  Vector row_scales;
  std::size_t c1 = 0;  // columns from the BSS stage
  std::size_t r1 = 0;

  DenseMatrix product() const;
};

std::size_t cur_leverage_samples(std::size_t k);
std::size_t cur_adaptive_samples(std::size_t k, double eps);
CurResult cur_decompose(const DenseMatrix& a, std::size_t k, double eps, std::uint64_t seed);

}  // namespace snla
