#pragma once

#include <functional>
#include <string>

#include "snla/matrix.hpp"

namespace snla {

enum class SketchKind { Gaussian, SparseEmbedding, SRHT, Sign, Cauchy, ExpReciprocalDiag, Identity };

std::string kind_name(SketchKind k);
SketchKind parse_kind(const std::string& name);

struct SketchOperator {
  SketchKind kind = SketchKind::Identity;
  std::size_t r = 0;  // out_dim
  std::size_t n = 0;  // in_dim
  std::uint64_t seed = 0;
  std::size_t nnz_per_col = 1;
  bool wasteful = false;  // sparse embedding with r > n

  // SparseEmbedding: nnz_per_col (row, sign) pairs per column
  std::vector<std::uint32_t> hash;
  std::vector<std::int8_t> signs;
  // SRHT
  std::size_t n_pad = 0;
  std::vector<std::int8_t> diag_signs;
  std::vector<std::size_t> sampled_rows;
  // ExpReciprocalDiag
  Vector diag;
  // Gaussian, Sign, Cauchy
  DenseMatrix dense;
};

SketchOperator make_sketch(SketchKind kind, std::size_t r, std::size_t n, std::uint64_t seed,
                           std::size_t nnz_per_col = 1);
// A sparse embedding, or the identity once r reaches n.
SketchOperator sparse_or_identity(std::size_t r, std::size_t n, std::uint64_t seed);

DenseMatrix apply_sketch(const SketchOperator& s, const DenseMatrix& a);
DenseMatrix apply_sketch(const SketchOperator& s, const SparseMatrix& a);
Vector apply_sketch(const SketchOperator& s, std::span<const double> x);
// Explicit r×n matrix.
DenseMatrix sketch_matrix(const SketchOperator& s);

std::size_t next_pow2(std::size_t n);
// Unnormalized in-place Walsh–Hadamard transform over the rows of a (rows = power of two).
void fwht_rows(DenseMatrix& a);

struct EmbeddingReport {
  Vector sigma;
  double eps_obs = 0;
};

EmbeddingReport verify_embedding(const SketchOperator& s, const DenseMatrix& a, double basis_tol = -1.0);

DenseMatrix approx_matmul(const SketchOperator& s, const DenseMatrix& a, const DenseMatrix& b);

struct SketchFamily {
  SketchKind kind;
  std::size_t r;
  std::size_t n;
};

double jl_moment_estimate(const SketchFamily& family, int ell, std::size_t trials, std::uint64_t seed);

struct BoostedEmbedding {
  SketchOperator op;
  DenseMatrix sa;
  std::size_t chosen = 0;
  std::size_t trials = 0;
};

std::size_t boost_trial_count(double delta);
std::size_t boost_rows(std::size_t d, double eps);
BoostedEmbedding boost_embedding(const DenseMatrix& a, double eps, double delta, std::uint64_t seed);
BoostedEmbedding boost_embedding(const DenseMatrix& a, double eps, std::size_t trials,
                                 const std::function<SketchOperator(std::size_t)>& make);
// Singular values of D_j V_jᵀ V_j′ D_j′⁻¹ for the two sketched copies.
Vector cross_singular_values(const DenseMatrix& sa_j, const DenseMatrix& sa_k);

}  // namespace snla
