#include "snla/generate.hpp"

#include "snla/rng.hpp"

namespace snla {

DenseMatrix gaussian_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  DenseMatrix a(n, d);
  Rng rng(seed, 91);
  for (double& x : a.data()) x = rng.normal();
  return a;
}

Vector gaussian_vector(std::size_t n, std::uint64_t seed) {
  Vector v(n);
  Rng rng(seed, 92);
  for (double& x : v) x = rng.normal();
  return v;
}

DenseMatrix planted_rank_matrix(std::size_t n, std::size_t d, std::size_t rank, double noise, std::uint64_t seed) {
  require(rank >= 1 && rank <= std::min(n, d), ErrorCode::InvalidArgument, "planted rank out of range");
  require(noise >= 0, ErrorCode::InvalidArgument, "noise must be nonnegative");
  DenseMatrix a = matmul(gaussian_matrix(n, rank, derive_seed(seed, 1)), gaussian_matrix(rank, d, derive_seed(seed, 2)));
  if (noise > 0) a += gaussian_matrix(n, d, derive_seed(seed, 3)) * noise;
  return a;
}

}  // namespace snla
