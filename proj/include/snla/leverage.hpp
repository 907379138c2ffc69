#pragma once

#include "snla/matrix.hpp"

namespace snla {

struct SamplingPlan {
  std::size_t s = 0;
  std::vector<std::size_t> indices;
  Vector scales;
  Vector q;
};

Vector leverage_exact(const DenseMatrix& a);

// γ = largest power of 1/2 with (1−γ)(1−2γ) ≥ β
double gamma_for_beta(double beta);
Vector leverage_approx(const DenseMatrix& a, double beta_target, std::uint64_t seed,
                       double width_c = -1.0);

SamplingPlan rand_sampling(std::span<const double> q, std::size_t s, std::uint64_t seed);
// DᵀΩᵀ·A: sampled rows of A, each scaled.
DenseMatrix apply_plan(const SamplingPlan& plan, const DenseMatrix& a);
// s > 144·k·ln(2k/δ)/(β·ε²)
std::size_t leverage_sample_count(std::size_t k, double beta, double eps, double delta);

}  // namespace snla
