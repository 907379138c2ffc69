#pragma once

#include "snla/matrix.hpp"

namespace snla {

// N(0,1) entries
DenseMatrix gaussian_matrix(std::size_t n, std::size_t d, std::uint64_t seed);
Vector gaussian_vector(std::size_t n, std::uint64_t seed);
// G₁G₂ with G₁ n×rank, G₂ rank×d Gaussian, plus noise·N(0,1) entries
DenseMatrix planted_rank_matrix(std::size_t n, std::size_t d, std::size_t rank, double noise, std::uint64_t seed);

}  // namespace snla
