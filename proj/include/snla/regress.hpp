#pragma once

#include <functional>

#include "snla/matrix.hpp"
#include "snla/sketch.hpp"

namespace snla {

Vector solve_l2_exact(const DenseMatrix& a, std::span<const double> b);
double l2_cost(const DenseMatrix& a, std::span<const double> x, std::span<const double> b);
double l1_cost(const DenseMatrix& a, std::span<const double> x, std::span<const double> b);

std::size_t sketch_solve_rows(std::size_t d, double eps);
Vector sketch_solve_l2(const DenseMatrix& a, std::span<const double> b, double eps, std::uint64_t seed);

// Minimizes over the caller's feasible set given the sketched (SA, Sb).
using SmallL2Solver = std::function<Vector(const DenseMatrix& sa, std::span<const double> sb)>;
Vector sketch_solve_l2_constrained(const DenseMatrix& a, std::span<const double> b, const SmallL2Solver& solver,
                                   double eps, std::uint64_t seed);

struct IterationTrace {
  Vector residuals;             // ‖Ax^m − b‖ for m = 0..iterations
  std::vector<Vector> iterates;  // x^m
  Vector x;
  std::size_t iterations = 0;
  double kappa = 0;  // σ_max(AR)/σ_min(AR)
  std::size_t sketch_rows = 0;
};

std::size_t precond_iterations(double eps);
std::size_t precond_rows(std::size_t d, double eps0);
IterationTrace precond_solve_l2(const DenseMatrix& a, std::span<const double> b, double eps, std::uint64_t seed);
// Same scheme with an explicit preconditioning sketch.
IterationTrace precond_solve_l2(const DenseMatrix& a, std::span<const double> b, double eps,
                                const SketchOperator& s);

enum class L1Embedding { Cauchy, ExpCountSketch };

struct WellConditionedBasis {
  DenseMatrix rinv;  // d×d
  double alpha = 0;  // Σ_j ‖(A·Rinv)_{*j}‖₁
  double beta = 1;   // ‖x‖_∞ ≤ β‖A·Rinv·x‖₁
  std::size_t sketch_rows = 0;
};

std::size_t l1_embedding_rows(L1Embedding kind, std::size_t d);
WellConditionedBasis wcb_from_sketch(const DenseMatrix& a, L1Embedding kind, std::uint64_t seed);
// Basis from a caller-chosen sketch; with S = I this is QR of A itself.
WellConditionedBasis wcb_from_operator(const DenseMatrix& a, const SketchOperator& s);
// Exact β for U = A·Rinv: max_i 1/min_{x_i=1}‖Ux‖₁.
double certify_beta(const DenseMatrix& u);
// rows: n of the n×d input
double wcb_alpha_bound(std::size_t d, std::size_t rows);

Vector l1_sampling_probs(const DenseMatrix& a, const WellConditionedBasis& basis, std::uint64_t seed,
                         double width_c = -1.0);

struct L1Solution {
  Vector x;
  double cost = 0;
  bool converged = true;
  std::size_t iterations = 0;
  std::size_t sampled_rows = 0;
};

L1Solution solve_l1_small(const DenseMatrix& a, std::span<const double> b, double tol = 1e-8);
// Enumerates every d-row interpolating vertex; tiny instances only.
L1Solution solve_l1_vertex_enum(const DenseMatrix& a, std::span<const double> b);

std::size_t l1_sample_budget(std::size_t d_aug, double eps, double c = -1.0);
L1Solution solve_l1_sketched(const DenseMatrix& a, std::span<const double> b, double eps, L1Embedding kind,
                             std::uint64_t seed);

struct HyperplaneFit {
  std::size_t j = 0;
  Vector w;  // w_j = 1
  double sketched_cost = 0;
  double cost = 0;  // Σ_i |⟨w, p_i⟩| on all points
};

// affine: append a constant-1 column first (hyperplanes need not pass through 0)
HyperplaneFit l1_hyperplane_fit(const DenseMatrix& points, double eps, std::uint64_t seed, bool affine = false,
                                L1Embedding kind = L1Embedding::Cauchy);
// Same search solved on all points without sampling.
HyperplaneFit l1_hyperplane_exact(const DenseMatrix& points, bool affine = false);

}  // namespace snla
