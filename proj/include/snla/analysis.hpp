#pragma once

#include <functional>

#include "snla/matrix.hpp"

namespace snla {

struct SchattenEstimate {
  int p = 0;
  double estimate = 0;  // of ‖A‖_p^p
  std::size_t trials = 0;
  std::size_t passes = 0;
};

std::size_t schatten_probes(double eps);
SchattenEstimate schatten_estimate(const DenseMatrix& a, int p, double eps, std::uint64_t seed);
// Single probe value gᵀ|B|^p g / 2 for the symmetrization B of A.
double schatten_probe(const DenseMatrix& a, int p, std::span<const double> g);
double schatten_exact(const DenseMatrix& a, int p);

using NormOracle = std::function<double(std::span<const double>)>;

struct AttackResult {
  Vector v;
  std::size_t queries = 0;
  double final_answer = 0;  // oracle on v
  double gram_lambda_min = 0;
  double gram_lambda_max = 0;
};

std::size_t jl_attack_queries(std::size_t k);
// Throws Inapplicable when the recovered Gram block has full numerical rank.
AttackResult jl_attack(const NormOracle& oracle, std::size_t k, std::size_t n);

}  // namespace snla
