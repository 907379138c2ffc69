#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracle.hpp"
#include "snla/generate.hpp"
#include "snla/linalg.hpp"
#include "snla/regress.hpp"
#include "snla/rng.hpp"

using namespace snla;

namespace {

Vector eigen_ls(const DenseMatrix& a, const Vector& b) {
  const oracle::Mat e = oracle::to_eigen(a);
  const oracle::Vec x = (e.transpose() * e).ldlt().solve(e.transpose() * oracle::to_eigen(b));
  return Vector(x.data(), x.data() + x.size());
}

Vector plant(const DenseMatrix& a, const Vector& x, double noise, std::uint64_t seed) {
  Vector b = matvec(a, x);
  const Vector z = gaussian_vector(b.size(), seed);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] += noise * z[i];
  return b;
}

// min_t Σ|c_i + t·e_i| by checking every breakpoint
double l1_line_min(const Vector& c, const Vector& e) {
  double best = norm1(c);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (e[k] == 0) continue;
    const double t = -c[k] / e[k];
    double s = 0;
    for (std::size_t i = 0; i < c.size(); ++i) s += std::abs(c[i] + t * e[i]);
    best = std::min(best, s);
  }
  return best;
}

// nonnegative least squares over d = 2 by active sets
Vector nnls2(const DenseMatrix& a, std::span<const double> b) {
  Vector best = {0, 0};
  double cost = l2_cost(a, best, b);
  auto consider = [&](Vector x) {
    if (x[0] < 0 || x[1] < 0) return;
    const double c = l2_cost(a, x, b);
    if (c < cost) cost = c, best = x;
  };
  consider(solve_l2_exact(a, b));
  for (std::size_t j = 0; j < 2; ++j) {
    const Vector col = a.col(j);
    Vector x = {0, 0};
    x[j] = dot(col, b) / dot(col, col);
    consider(x);
  }
  return best;
}

}  // namespace

TEST_CASE("exact least squares matches the normal equations") {
  const DenseMatrix a = gaussian_matrix(80, 6, 1);
  const Vector b = gaussian_vector(80, 2);
  const Vector x = solve_l2_exact(a, b), ref = eigen_ls(a, b);
  for (std::size_t j = 0; j < 6; ++j) CHECK(x[j] == doctest::Approx(ref[j]).epsilon(1e-10));
  // residual orthogonal to the column space
  Vector r = matvec(a, x);
  for (std::size_t i = 0; i < 80; ++i) r[i] = b[i] - r[i];
  CHECK(norm_inf(matvec_t(a, r)) < 1e-10);
  CHECK(l2_cost(a, x, b) == doctest::Approx(norm2(r)));
}

TEST_CASE("costs of a hand example") {
  const DenseMatrix a(3, 1, {1, 2, 3});
  const Vector x = {1}, b = {1, 0, 0};
  CHECK(l2_cost(a, x, b) == doctest::Approx(std::sqrt(13.0)));
  CHECK(l1_cost(a, x, b) == doctest::Approx(5.0));
  CHECK_THROWS_AS(l2_cost(a, x, Vector{1, 2}), Error);
}

TEST_CASE("sketch-and-solve is within 1+eps of optimal") {
  CHECK(sketch_solve_rows(4, 0.5) == 32);
  CHECK(sketch_solve_rows(3, 0.1) == 90);
  const DenseMatrix a = gaussian_matrix(3000, 4, 5);
  const Vector b = plant(a, {1, -2, 0.5, 3}, 1.0, 6);
  const double opt = l2_cost(a, solve_l2_exact(a, b), b);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Vector x = sketch_solve_l2(a, b, 0.5, seed);
    ok += l2_cost(a, x, b) <= 1.5 * opt;
  }
  CHECK(ok >= 36);
  CHECK_THROWS_AS(sketch_solve_l2(a, b, 1.5, 0), Error);
}

TEST_CASE("sketch-and-solve on a consistent system is exact") {
  const DenseMatrix a = gaussian_matrix(500, 3, 7);
  const Vector x0 = {2, -1, 4};
  const Vector x = sketch_solve_l2(a, matvec(a, x0), 0.5, 3);
  for (std::size_t j = 0; j < 3; ++j) CHECK(x[j] == doctest::Approx(x0[j]).epsilon(1e-9));
}

TEST_CASE("constrained sketch-and-solve over a line") {
  const DenseMatrix a = gaussian_matrix(2000, 3, 8);
  const Vector b = plant(a, {1, 1, 1}, 2.0, 9);
  const Vector v = {1, -1, 2};
  auto line = [&](const DenseMatrix& sa, std::span<const double> sb) {
    const Vector sav = matvec(sa, v);
    const double t = dot(sav, sb) / dot(sav, sav);
    return Vector{t * v[0], t * v[1], t * v[2]};
  };
  const Vector best = line(a, b);
  const double opt = l2_cost(a, best, b);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Vector x = sketch_solve_l2_constrained(a, b, line, 0.5, seed);
    // result stays on the line
    CHECK(x[1] == doctest::Approx(-x[0]));
    CHECK(x[2] == doctest::Approx(2 * x[0]));
    ok += l2_cost(a, x, b) <= 1.5 * opt;
  }
  CHECK(ok >= 27);
}

TEST_CASE("constrained sketch-and-solve with nonnegativity") {
  const DenseMatrix a = gaussian_matrix(2000, 2, 10);
  const Vector b = plant(a, {-1, 2}, 1.0, 11);
  const Vector best = nnls2(a, b);
  CHECK(best[0] == 0.0);
  const double opt = l2_cost(a, best, b);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Vector x = sketch_solve_l2_constrained(a, b, nnls2, 0.5, seed);
    CHECK(x[0] >= 0);
    CHECK(x[1] >= 0);
    ok += l2_cost(a, x, b) <= 1.5 * opt;
  }
  CHECK(ok >= 27);
}

TEST_CASE("preconditioned iteration sizes") {
  CHECK(precond_iterations(1.0 / 3) == 2);
  CHECK(precond_iterations(0.1) == 4);
  CHECK(precond_iterations(1e-10) == 22);
  CHECK(precond_rows(5, 0.5) == 1000);
}

TEST_CASE("preconditioned solve contracts the excess cost geometrically") {
  const DenseMatrix a = gaussian_matrix(4000, 5, 12);
  DenseMatrix scaled = a;
  for (std::size_t i = 0; i < scaled.rows(); ++i) scaled(i, 0) *= 1000;  // ill conditioned
  const Vector b = plant(scaled, {1, 2, 3, 4, 5}, 1.0, 13);
  const double opt = l2_cost(scaled, solve_l2_exact(scaled, b), b);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const IterationTrace tr = precond_solve_l2(scaled, b, 1e-6, seed);
    REQUIRE(tr.residuals.size() == tr.iterations + 1);
    CHECK(tr.kappa <= std::sqrt(3.0));
    double prev = tr.residuals[0] * tr.residuals[0] - opt * opt;
    for (std::size_t m = 1; m < tr.residuals.size(); ++m) {
      const double gap = tr.residuals[m] * tr.residuals[m] - opt * opt;
      CHECK(gap >= -1e-8 * opt * opt);
      if (prev > 1e-9 * opt * opt) CHECK(gap <= prev / 3);
      prev = gap;
    }
    CHECK(tr.residuals.back() <= (1 + 1e-6) * opt);
  }
}

TEST_CASE("preconditioning with R from A itself needs no iterations") {
  const DenseMatrix a = gaussian_matrix(200, 4, 14);
  const Vector b = gaussian_vector(200, 15);
  const IterationTrace tr = precond_solve_l2(a, b, 0.1, make_sketch(SketchKind::Identity, 200, 200, 0));
  CHECK(tr.kappa == doctest::Approx(1.0));
  const Vector ref = eigen_ls(a, b);
  for (const Vector& x : tr.iterates)
    for (std::size_t j = 0; j < 4; ++j) CHECK(x[j] == doctest::Approx(ref[j]).epsilon(1e-9));
}

TEST_CASE("certified beta of small bases") {
  CHECK(certify_beta(DenseMatrix::identity(3)) == doctest::Approx(1.0));
  CHECK(certify_beta(DenseMatrix(2, 1, {1, 1})) == doctest::Approx(0.5));
  CHECK(certify_beta(DenseMatrix(3, 1, {1, -2, 0.5})) == doctest::Approx(1 / 3.5));
}

TEST_CASE("certified beta matches a breakpoint oracle for two columns") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DenseMatrix u = gaussian_matrix(25, 2, 200 + seed);
    const Vector c0 = u.col(0), c1 = u.col(1);
    const double beta = std::max(1 / l1_line_min(c0, c1), 1 / l1_line_min(c1, c0));
    CHECK(certify_beta(u) == doctest::Approx(beta).epsilon(1e-9));
  }
}

TEST_CASE("well-conditioned basis from the identity sketch") {
  const DenseMatrix a = gaussian_matrix(100, 3, 16);
  const WellConditionedBasis w = wcb_from_operator(a, make_sketch(SketchKind::Identity, 100, 100, 0));
  const DenseMatrix u = matmul(a, w.rinv);
  double alpha = 0;
  for (std::size_t j = 0; j < 3; ++j) alpha += norm1(u.col(j));
  CHECK(w.alpha == doctest::Approx(alpha));
  CHECK(w.beta == doctest::Approx(1.0));
  CHECK(certify_beta(u) == doctest::Approx(1.0).epsilon(1e-6));
  // spans the column space of A
  CHECK(numerical_rank(hcat(a, u)) == 3);
}

TEST_CASE("sketched well-conditioned basis satisfies its bounds") {
  CHECK(l1_embedding_rows(L1Embedding::Cauchy, 1) == 2);
  CHECK(l1_embedding_rows(L1Embedding::Cauchy, 4) == std::size_t(std::ceil(8 * std::log(4.0))));
  CHECK(l1_embedding_rows(L1Embedding::ExpCountSketch, 4) >= 5);
  const DenseMatrix a = gaussian_matrix(1000, 4, 17);
  for (L1Embedding kind : {L1Embedding::Cauchy, L1Embedding::ExpCountSketch})
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const WellConditionedBasis w = wcb_from_sketch(a, kind, seed);
      const DenseMatrix u = matmul(a, w.rinv);
      CHECK(w.alpha <= wcb_alpha_bound(4, a.rows()));
      CHECK(certify_beta(u) == doctest::Approx(w.beta).epsilon(1e-6));
      Rng rng(seed, 3);
      for (int p = 0; p < 200; ++p) {
        Vector x(4);
        for (double& v : x) v = rng.normal();
        CHECK(norm_inf(x) <= w.beta * norm1(matvec(u, x)) * (1 + 1e-9));
      }
    }
}

TEST_CASE("l1 with a constant column is the median") {
  const DenseMatrix a(5, 1, {1, 1, 1, 1, 1});
  const Vector b = {3, -1, 10, 4, 0};
  const L1Solution s = solve_l1_small(a, b);
  CHECK(s.x[0] == doctest::Approx(3.0));
  CHECK(s.cost == doctest::Approx(4 + 7 + 1 + 3));
  CHECK(s.converged);
}

TEST_CASE("l1 small solver agrees with vertex enumeration") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const DenseMatrix a = gaussian_matrix(30, 3, 300 + seed);
    Vector b = plant(a, {1, 0, -1}, 1.0, 400 + seed);
    b[0] += 50;
    const L1Solution s = solve_l1_small(a, b), e = solve_l1_vertex_enum(a, b);
    CHECK(s.cost == doctest::Approx(e.cost).epsilon(1e-9));
    CHECK(l1_cost(a, s.x, b) == doctest::Approx(s.cost));
  }
}

TEST_CASE("l1 solution is equivariant under scaling and reparametrization") {
  const DenseMatrix a = gaussian_matrix(40, 3, 18);
  const Vector b = gaussian_vector(40, 19);
  const L1Solution s = solve_l1_small(a, b);
  Vector b5 = b;
  for (double& v : b5) v *= 5;
  CHECK(solve_l1_small(a, b5).cost == doctest::Approx(5 * s.cost));
  const DenseMatrix t = gaussian_matrix(3, 3, 20);
  CHECK(solve_l1_small(matmul(a, t), b).cost == doctest::Approx(s.cost).epsilon(1e-9));
  // least squares: x(cb) = c·x(b)
  const Vector x = solve_l2_exact(a, b), x5 = solve_l2_exact(a, b5);
  for (std::size_t j = 0; j < 3; ++j) CHECK(x5[j] == doctest::Approx(5 * x[j]));
}

TEST_CASE("sampled l1 regression resists heavy outliers") {
  CHECK(l1_sample_budget(4, 0.5) == 128);
  const std::size_t n = 2000;
  const DenseMatrix a = gaussian_matrix(n, 3, 21);
  Vector b = plant(a, {2, -1, 0.5}, 0.1, 22);
  Rng rng(23, 0);
  for (std::size_t i = 0; i < n; i += 20) b[i] += 1e4 * rng.cauchy();
  const double opt = solve_l1_small(a, b).cost;
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const L1Solution s = solve_l1_sketched(a, b, 0.5, L1Embedding::Cauchy, seed);
    CHECK(s.cost == doctest::Approx(l1_cost(a, s.x, b)));
    CHECK(s.sampled_rows > 0);
    ok += s.cost <= 1.5 * opt;
  }
  CHECK(ok >= 5);
  // the least squares fit is dragged by the outliers, the sampled l1 fit is not
  const Vector x0 = {2, -1, 0.5}, x2 = solve_l2_exact(a, b);
  const Vector x1 = solve_l1_sketched(a, b, 0.5, L1Embedding::Cauchy, 0).x;
  double e1 = 0, e2 = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    e1 = std::max(e1, std::abs(x1[j] - x0[j]));
    e2 = std::max(e2, std::abs(x2[j] - x0[j]));
  }
  CHECK(e1 < 0.1);
  CHECK(e2 > 10 * e1);
}

TEST_CASE("hyperplane fit recovers a noisy plane") {
  const std::size_t n = 1500;
  const DenseMatrix g = gaussian_matrix(n, 2, 24);
  DenseMatrix p(n, 3);
  const Vector z = gaussian_vector(n, 25);
  for (std::size_t i = 0; i < n; ++i) {
    p(i, 0) = g(i, 0);
    p(i, 1) = g(i, 1);
    p(i, 2) = 0.5 * g(i, 0) - 2 * g(i, 1) + 0.01 * z[i];
  }
  const HyperplaneFit exact = l1_hyperplane_exact(p);
  CHECK(exact.w[exact.j] == 1.0);
  // normal ∝ (0.5, −2, −1)
  const double s = exact.w[0] / 0.5;
  CHECK(exact.w[1] == doctest::Approx(-2 * s).epsilon(0.02));
  CHECK(exact.w[2] == doctest::Approx(-s).epsilon(0.02));
  const HyperplaneFit fit = l1_hyperplane_fit(p, 0.5, 1);
  CHECK(fit.cost >= exact.cost * (1 - 1e-9));
  CHECK(fit.cost <= 1.5 * exact.cost);
  CHECK(fit.cost == doctest::Approx(norm1(matvec(p, fit.w))));
}

TEST_CASE("affine hyperplane cost is translation invariant") {
  const std::size_t n = 300;
  DenseMatrix p = gaussian_matrix(n, 3, 26);
  for (std::size_t i = 0; i < n; ++i) p(i, 2) = p(i, 0) + p(i, 1) + 0.05 * p(i, 2);
  DenseMatrix q = p;
  for (std::size_t i = 0; i < n; ++i) {
    q(i, 0) += 7;
    q(i, 1) -= 3;
    q(i, 2) += 11;
  }
  const HyperplaneFit hp = l1_hyperplane_exact(p, true), hq = l1_hyperplane_exact(q, true);
  CHECK(hp.w.size() == 4);
  CHECK(hq.cost == doctest::Approx(hp.cost).epsilon(1e-8));
  // the homogeneous fit is hurt by the shift
  CHECK(l1_hyperplane_exact(q).cost > 2 * hq.cost);
}

TEST_CASE("degenerate point sets are fitted exactly") {
  DenseMatrix p = gaussian_matrix(20, 3, 27);
  for (std::size_t i = 0; i < 20; ++i) p(i, 2) = 2 * p(i, 0) - p(i, 1);
  const HyperplaneFit h = l1_hyperplane_fit(p, 0.5, 2);
  CHECK(h.cost < 1e-9);
}
