#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "oracle.hpp"
#include "snla/cur.hpp"
#include "snla/generate.hpp"
#include "snla/linalg.hpp"
#include "snla/lowrank.hpp"

using namespace snla;

namespace {

double weighted_lambda_min(const DenseMatrix& v, const Vector& s) {
  const oracle::Mat e = oracle::to_eigen(v);
  oracle::Mat m = oracle::Mat::Zero(e.cols(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i) m += s[i] * e.row(i).transpose() * e.row(i);
  return Eigen::SelfAdjointEigenSolver<oracle::Mat>(m).eigenvalues()(0);
}

double best_rank_k_in_span(const DenseMatrix& a, const DenseMatrix& cols, std::size_t k) {
  const DenseMatrix q = orth(cols);
  const DenseMatrix qa = matmul_tn(q, a);
  const double proj = a.frobenius_sq() - qa.frobenius_sq();
  const double t = tail_norm(qa, std::min(k, qa.rows()), false);
  return proj + t * t;
}

void check_bss(const BssWeights& w, const DenseMatrix& v, const DenseMatrix& avecs) {
  const double root = std::sqrt(double(w.k) / double(w.r));
  CHECK(w.nonzeros() <= w.r);
  CHECK(w.lambda_k >= (1 - root) * (1 - root) * (1 - 1e-10));
  CHECK(w.lambda_k == doctest::Approx(weighted_lambda_min(v, w.s)).epsilon(1e-9));
  double mass = 0, total = 0;
  for (std::size_t i = 0; i < avecs.rows(); ++i) {
    const double n2 = dot(avecs.row(i), avecs.row(i));
    mass += w.s[i] * n2;
    total += n2;
    CHECK(w.s[i] >= 0);
  }
  CHECK(w.frob_total == doctest::Approx(total));
  CHECK(w.frob_mass == doctest::Approx(mass));
  CHECK(w.frob_mass <= total * (1 + 1e-10));
}

}  // namespace

TEST_CASE("BSS on the standard basis") {
  // v_i = e_i for i < k and zero after; only the first k vectors can lift λ_k
  const std::size_t n = 12, k = 2;
  DenseMatrix v(n, k);
  v(0, 0) = 1;
  v(1, 1) = 1;
  const DenseMatrix avecs = gaussian_matrix(n, 5, 1);
  const BssWeights w = bss_sampling(v, avecs, 8);
  check_bss(w, v, avecs);
  CHECK(w.s[0] > 0);
  CHECK(w.s[1] > 0);
}

TEST_CASE("BSS step traces follow the barrier schedule") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::size_t n = 60, k = 3, r = 12;
    const DenseMatrix v = orth(gaussian_matrix(n, k, seed));
    const DenseMatrix avecs = gaussian_matrix(n, 10, 100 + seed);
    const BssWeights w = bss_sampling(v, avecs, r);
    check_bss(w, v, avecs);
    REQUIRE(w.phi.size() == r);
    const double rk = std::sqrt(double(r * k));
    for (std::size_t t = 0; t < r; ++t) {
      CHECK(w.lower[t] == doctest::Approx(double(t) - rk));
      CHECK(w.trace_w[t] <= w.upper[t] * (1 + 1e-10) + 1e-12);
      if (t > 0) CHECK(w.phi[t] <= w.phi[t - 1] * (1 + 1e-10));
    }
    // initial potential Σ 1/(0 − L₀) = k/√(rk)
    CHECK(w.phi[0] == doctest::Approx(double(k) / rk));
  }
}

TEST_CASE("BSS rejects bad inputs") {
  const DenseMatrix v = orth(gaussian_matrix(10, 2, 2));
  const DenseMatrix avecs = gaussian_matrix(10, 3, 3);
  CHECK_THROWS_AS(bss_sampling(v, avecs, 2), Error);
  CHECK_THROWS_AS(bss_sampling(v, avecs, 11), Error);
  CHECK_THROWS_AS(bss_sampling(v * 2.0, avecs, 5), Error);
  CHECK_THROWS_AS(bss_sampling(v, gaussian_matrix(9, 3, 3), 5), Error);
}

TEST_CASE("sparse BSS keeps the spectral guarantee") {
  const DenseMatrix v = orth(gaussian_matrix(40, 2, 4));
  const DenseMatrix avecs = gaussian_matrix(40, 5000, 5);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const BssWeights w = bss_sampling_sparse(v, avecs, 8, 0.5, seed);
    CHECK(w.nonzeros() <= 8);
    CHECK(w.lambda_k >= 0.25 * (1 - 1e-10));
    CHECK(w.lambda_k == doctest::Approx(weighted_lambda_min(v, w.s)).epsilon(1e-9));
  }
  // short vectors are passed through untouched
  const DenseMatrix small = gaussian_matrix(40, 6, 6);
  const BssWeights a = bss_sampling_sparse(v, small, 8, 0.5, 1), b = bss_sampling(v, small, 8);
  CHECK(a.s == b.s);
}

TEST_CASE("length-squares estimate is a distribution close to the column norms") {
  const DenseMatrix b = gaussian_matrix(50, 400, 7);
  DenseMatrix bz = b;
  for (std::size_t i = 0; i < 50; ++i) bz(i, 3) = 0;
  const Vector p = length_squares_estimate(bz, 1);
  double total = 0, fro = bz.frobenius_sq();
  int near = 0;
  for (std::size_t j = 0; j < 400; ++j) {
    total += p[j];
    const Vector c = bz.col(j);
    const double truth = dot(c, c) / fro;
    if (j != 3) near += p[j] >= truth / 3 && p[j] <= 3 * truth;
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK(p[3] == 0.0);
  CHECK(near >= 395);
}

TEST_CASE("adaptive columns: nothing to draw when V spans A") {
  const DenseMatrix a = planted_rank_matrix(30, 20, 3, 0.0, 8);
  CHECK(adaptive_cols(a, a.cols_range(0, 5), 1.0 / 3, 10, 1).empty());
  CHECK_THROWS_AS(adaptive_cols(a, a, 0.0, 10, 1), Error);
}

TEST_CASE("adaptive columns avoid columns already explained") {
  DenseMatrix a = gaussian_matrix(20, 10, 9);
  const DenseMatrix v = a.cols_range(0, 4);
  for (std::size_t i : adaptive_cols(a, v, 1.0 / 3, 200, 2)) CHECK(i >= 4);
  // a single column outside span(V) takes every draw
  DenseMatrix b = hcat(v, DenseMatrix::column(gaussian_vector(20, 10)));
  for (std::size_t j = 0; j < 3; ++j) b = hcat(b, DenseMatrix::column(v.col(j)));
  const auto draws = adaptive_cols(b, v, 1.0 / 3, 50, 3);
  CHECK(draws.size() == 50);
  for (std::size_t i : draws) CHECK(i == 4);
}

TEST_CASE("adaptive sampling meets its expectation bound") {
  const DenseMatrix a = planted_rank_matrix(60, 80, 4, 0.3, 11);
  const std::size_t k = 4, c2 = 40;
  const double alpha = 1.0 / 3;
  const DenseMatrix v = a.cols_range(0, 2);
  const double base = a.frobenius_sq() - matmul_tn(orth(v), a).frobenius_sq();
  const double opt = std::pow(tail_norm(a, k, false), 2);
  double mean = 0;
  const int trials = 40;
  for (int t = 0; t < trials; ++t) {
    const auto idx = adaptive_cols(a, v, alpha, c2, 500 + t);
    mean += best_rank_k_in_span(a, hcat(v, a.select_cols(idx)), k) / trials;
  }
  CHECK(mean <= opt + double(k) / (alpha * double(c2)) * base);
  CHECK(mean >= opt * (1 - 1e-10));
}

TEST_CASE("residual variant checks the row-space rank condition") {
  const DenseMatrix a = gaussian_matrix(30, 12, 12);
  const DenseMatrix rrows = orth(gaussian_matrix(12, 3, 13)).transpose();
  const auto idx = adaptive_cols_residual(a, rrows, a.cols_range(0, 2), 1.0 / 3, 20, 4);
  CHECK(idx.size() == 20);
  // A R†R drops rank when A annihilates the row space
  DenseMatrix z = a;
  const DenseMatrix proj = matmul(matmul(z, rrows.transpose()), rrows);
  z -= proj;
  CHECK_THROWS_AS(adaptive_cols_residual(z, rrows, z.cols_range(0, 2), 1.0 / 3, 20, 4), Error);
}

TEST_CASE("CUR sample sizes") {
  CHECK(cur_leverage_samples(1) == 7);
  CHECK(cur_leverage_samples(4) == std::size_t(std::ceil(40 * std::log(5.0))));
  CHECK(cur_adaptive_samples(2, 0.5) == 1080);
}

TEST_CASE("CUR of an exactly low-rank matrix reproduces it") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const DenseMatrix a = planted_rank_matrix(40, 50, 3, 0.0, 20 + seed);
    const CurResult c = cur_decompose(a, 3, 0.5, seed);
    CHECK(numerical_rank(c.U) == 3);
    CHECK((c.product() - a).frobenius() <= 1e-8 * a.frobenius());
    for (std::size_t j = 0; j < c.col_indices.size(); ++j)
      for (std::size_t i = 0; i < 40; ++i) CHECK(c.C(i, j) == a(i, c.col_indices[j]) * c.col_scales[j]);
    for (std::size_t j = 0; j < c.row_indices.size(); ++j)
      for (std::size_t i = 0; i < 50; ++i) CHECK(c.R(j, i) == a(c.row_indices[j], i) * c.row_scales[j]);
    CHECK(c.c1 <= 12);
    CHECK(c.r1 <= 12);
    // adaptive stage adds distinct columns
    std::set<std::size_t> extra(c.col_indices.begin() + c.c1, c.col_indices.end());
    CHECK(extra.size() == c.col_indices.size() - c.c1);
  }
}

TEST_CASE("CUR of a noisy matrix is near optimal") {
  const DenseMatrix a = planted_rank_matrix(80, 80, 3, 0.05, 30);
  const double opt = tail_norm(a, 3, false);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const CurResult c = cur_decompose(a, 3, 0.5, seed);
    CHECK(numerical_rank(c.U) == 3);
    ok += (c.product() - a).frobenius() <= 1.5 * opt;
  }
  CHECK(ok >= 4);
}

TEST_CASE("CUR rejects bad arguments") {
  const DenseMatrix a = gaussian_matrix(10, 8, 1);
  CHECK_THROWS_AS(cur_decompose(a, 0, 0.5, 1), Error);
  CHECK_THROWS_AS(cur_decompose(a, 9, 0.5, 1), Error);
  CHECK_THROWS_AS(cur_decompose(a, 2, 1.0, 1), Error);
}
