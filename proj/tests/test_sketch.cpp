#include <cmath>

#include "doctest.h"
#include "oracle.hpp"
#include "snla/generate.hpp"
#include "snla/linalg.hpp"
#include "snla/rng.hpp"
#include "snla/sketch.hpp"

using namespace snla;

TEST_CASE("sparse embedding has one signed entry per column") {
  const SketchOperator s = make_sketch(SketchKind::SparseEmbedding, 4, 5, 42);
  const DenseMatrix m = sketch_matrix(s);
  REQUIRE(m.rows() == 4);
  REQUIRE(m.cols() == 5);
  for (std::size_t j = 0; j < 5; ++j) {
    int nz = 0;
    for (std::size_t i = 0; i < 4; ++i)
      if (m(i, j) != 0) {
        ++nz;
        CHECK(std::abs(m(i, j)) == 1.0);
      }
    CHECK(nz == 1);
  }
  // applied to the identity, column i is σ(i)·e_{h(i)}
  const DenseMatrix si = apply_sketch(s, DenseMatrix::identity(5));
  for (std::size_t j = 0; j < 5; ++j)
    for (std::size_t i = 0; i < 4; ++i) CHECK(si(i, j) == (i == s.hash[j] ? double(s.signs[j]) : 0.0));
  CHECK(!s.wasteful);
  CHECK(make_sketch(SketchKind::SparseEmbedding, 8, 5, 1).wasteful);
}

TEST_CASE("operators are reproducible from the seed") {
  const DenseMatrix a = gaussian_matrix(40, 3, 1);
  for (SketchKind k : {SketchKind::Gaussian, SketchKind::SparseEmbedding, SketchKind::SRHT, SketchKind::Sign,
                       SketchKind::Cauchy}) {
    const SketchOperator s1 = make_sketch(k, 8, 40, 9), s2 = make_sketch(k, 8, 40, 9), s3 = make_sketch(k, 8, 40, 10);
    CHECK(apply_sketch(s1, a).data() == apply_sketch(s2, a).data());
    CHECK(apply_sketch(s1, a).data() != apply_sketch(s3, a).data());
  }
  const SketchOperator e1 = make_sketch(SketchKind::ExpReciprocalDiag, 40, 40, 3);
  CHECK(e1.diag == make_sketch(SketchKind::ExpReciprocalDiag, 40, 40, 3).diag);
  for (double d : e1.diag) CHECK(d > 0);
}

TEST_CASE("kind names round trip and bad arguments are rejected") {
  for (SketchKind k : {SketchKind::Gaussian, SketchKind::SparseEmbedding, SketchKind::SRHT, SketchKind::Sign,
                       SketchKind::Cauchy, SketchKind::ExpReciprocalDiag, SketchKind::Identity})
    CHECK(parse_kind(kind_name(k)) == k);
  CHECK_THROWS_AS(parse_kind("fourier"), Error);
  CHECK_THROWS_AS(make_sketch(SketchKind::Gaussian, 0, 3, 1), Error);
  CHECK_THROWS_AS(make_sketch(SketchKind::SRHT, 9, 8, 1), Error);
  CHECK_THROWS_AS(apply_sketch(make_sketch(SketchKind::Gaussian, 2, 3, 1), DenseMatrix(4, 1)), Error);
}

TEST_CASE("a 1x1 Gaussian operator scales by one normal draw") {
  const SketchOperator s = make_sketch(SketchKind::Gaussian, 1, 1, 5);
  const double g = s.dense(0, 0);
  CHECK(apply_sketch(s, DenseMatrix(1, 1, {2.0}))(0, 0) == 2 * g);
}

TEST_CASE("entry distributions of the dense kinds") {
  const SketchOperator sg = make_sketch(SketchKind::Sign, 16, 50, 2);
  for (double v : sg.dense.data()) CHECK(std::abs(v) == doctest::Approx(0.25));
  const SketchOperator ga = make_sketch(SketchKind::Gaussian, 100, 400, 3);
  double mean = 0, sq = 0;
  for (double v : ga.dense.data()) {
    mean += v;
    sq += v * v;
  }
  mean /= 40000;
  sq /= 40000;
  CHECK(std::abs(mean) <= 4 * 0.1 / 200);
  CHECK(sq == doctest::Approx(1.0 / 100).epsilon(0.03));  // N(0, 1/r)
}

TEST_CASE("SRHT against an explicit Hadamard matrix") {
  const SketchOperator s = make_sketch(SketchKind::SRHT, 2, 2, 7);
  REQUIRE(s.n_pad == 2);
  const DenseMatrix x(2, 1, {1, 0});
  const DenseMatrix h2(2, 2, {1, 1, 1, -1});
  DenseMatrix dx = x;
  dx(0, 0) *= s.diag_signs[0];
  const DenseMatrix hdx = matmul(h2, dx);
  const DenseMatrix got = apply_sketch(s, x);
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(got(i, 0) == doctest::Approx(hdx(s.sampled_rows[i], 0) / std::sqrt(2.0)));
  CHECK(next_pow2(5) == 8);
  CHECK(next_pow2(8) == 8);
}

TEST_CASE("the normalized Hadamard-sign map is orthonormal") {
  for (std::size_t n : {1u, 2u, 16u, 64u}) {
    DenseMatrix h = DenseMatrix::identity(n);
    fwht_rows(h);
    h *= 1.0 / std::sqrt(double(n));
    const DenseMatrix g = matmul_tn(h, h);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(g(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);
  }
}

TEST_CASE("SRHT preserves squared norms in expectation") {
  const Vector x = gaussian_vector(100, 4);
  double mean = 0;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const Vector sx = apply_sketch(make_sketch(SketchKind::SRHT, 16, 100, s), x);
    mean += dot(sx, sx);
  }
  mean /= 2000;
  CHECK(mean == doctest::Approx(dot(x, x)).epsilon(0.05));
}

TEST_CASE("sparse embedding application is linear and matches the explicit matrix") {
  const DenseMatrix a = gaussian_matrix(30, 4, 1), b = gaussian_matrix(30, 4, 2);
  const SketchOperator s = make_sketch(SketchKind::SparseEmbedding, 7, 30, 3);
  CHECK((apply_sketch(s, a + b) - apply_sketch(s, a) - apply_sketch(s, b)).max_abs() <= 1e-14);
  // integer data: every partial sum is exact, so equality is bitwise
  DenseMatrix ia(30, 4), ib(30, 4);
  Rng rng(12);
  for (double& v : ia.data()) v = double(rng.index(2001)) - 1000;
  for (double& v : ib.data()) v = double(rng.index(2001)) - 1000;
  CHECK(apply_sketch(s, ia + ib).data() == (apply_sketch(s, ia) + apply_sketch(s, ib)).data());
  CHECK((apply_sketch(s, a) - matmul(sketch_matrix(s), a)).max_abs() <= 1e-14);
  CHECK((apply_sketch(s, SparseMatrix::from_dense(a)) - apply_sketch(s, a)).max_abs() <= 1e-14);
  const SketchOperator s3 = make_sketch(SketchKind::SparseEmbedding, 7, 30, 3, 3);
  CHECK((apply_sketch(s3, a) - matmul(sketch_matrix(s3), a)).max_abs() <= 1e-13);
  const Vector x = gaussian_vector(30, 9);
  const Vector sx = apply_sketch(s, x);
  const Vector ref = matvec(sketch_matrix(s), x);
  for (std::size_t i = 0; i < sx.size(); ++i) CHECK(sx[i] == doctest::Approx(ref[i]));
}

TEST_CASE("identity sketch and sparse_or_identity") {
  const DenseMatrix a = gaussian_matrix(20, 3, 5);
  CHECK(verify_embedding(make_sketch(SketchKind::Identity, 20, 20, 0), a).eps_obs <= 1e-12);
  CHECK(sparse_or_identity(25, 20, 1).kind == SketchKind::Identity);
  CHECK(sparse_or_identity(10, 20, 1).kind == SketchKind::SparseEmbedding);
  CHECK_THROWS_AS(verify_embedding(make_sketch(SketchKind::Identity, 3, 3, 0), DenseMatrix(3, 2)), Error);
}

TEST_CASE("Gaussian sketch concentrates the norm of a fixed vector") {
  Vector x = gaussian_vector(1000, 1);
  const double nx = norm2(x);
  for (double& v : x) v /= nx;
  int ok = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Vector sx = apply_sketch(make_sketch(SketchKind::Gaussian, 400, 1000, s), x);
    const double q = dot(sx, sx);
    ok += q >= 0.8 && q <= 1.2;
  }
  CHECK(ok >= 95);
}

TEST_CASE("verify_embedding agrees with the singular values of SU") {
  const DenseMatrix a = gaussian_matrix(200, 4, 3);
  const SketchOperator s = make_sketch(SketchKind::Gaussian, 60, 200, 11);
  const EmbeddingReport rep = verify_embedding(s, a);
  const oracle::Mat u = Eigen::JacobiSVD<oracle::Mat>(oracle::to_eigen(a), Eigen::ComputeThinU).matrixU();
  const oracle::Vec sv = Eigen::JacobiSVD<oracle::Mat>(oracle::to_eigen(s.dense) * u).singularValues();
  double eps = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    CHECK(rep.sigma[i] == doctest::Approx(sv(i)).epsilon(1e-10));
    eps = std::max(eps, std::abs(sv(i) * sv(i) - 1));
  }
  CHECK(rep.eps_obs == doctest::Approx(eps).epsilon(1e-10));
}

TEST_CASE("Gaussian embedding with 100d rows") {
  const DenseMatrix a = gaussian_matrix(500, 4, 8);
  int ok = 0;
  for (std::uint64_t s = 0; s < 100; ++s) ok += verify_embedding(make_sketch(SketchKind::Gaussian, 400, 500, s), a).eps_obs <= 0.5;
  CHECK(ok >= 99);
}

TEST_CASE("sparse embedding with d²/(δε²) rows") {
  const DenseMatrix a = gaussian_matrix(3000, 6, 9);
  int ok = 0;
  for (std::uint64_t s = 0; s < 100; ++s)
    ok += verify_embedding(make_sketch(SketchKind::SparseEmbedding, 1440, 3000, s), a).eps_obs <= 0.5;
  CHECK(ok >= 90);
}

TEST_CASE("each family's failure fraction stays within δ + 3√(δ/trials)") {
  const std::size_t n = 1024, d = 4, trials = 300;
  const double eps = 0.5, delta = 0.1;
  const DenseMatrix a = gaussian_matrix(n, d, 10);
  struct Case {
    SketchKind kind;
    std::size_t r;
  };
  // rows from the respective dimension statements with constants as 1
  const Case cases[] = {{SketchKind::SparseEmbedding, std::size_t(d * d / (delta * eps * eps))},
                        {SketchKind::Gaussian, std::size_t(std::ceil((d + std::log(1 / delta)) / (eps * eps))) * 4},
                        {SketchKind::SRHT, 256}};
  for (const Case& c : cases) {
    int bad = 0;
    for (std::uint64_t s = 0; s < trials; ++s) bad += verify_embedding(make_sketch(c.kind, c.r, n, s), a).eps_obs > eps;
    INFO(kind_name(c.kind), " r=", c.r);
    CHECK(double(bad) / trials <= delta + 3 * std::sqrt(delta / trials));
  }
}

TEST_CASE("approximate matrix product") {
  const DenseMatrix a = gaussian_matrix(50, 3, 1), b = gaussian_matrix(50, 2, 2);
  CHECK((approx_matmul(make_sketch(SketchKind::Identity, 50, 50, 0), a, b) - matmul_tn(a, b)).max_abs() <= 1e-12);
  const double eps = 0.5, delta = 0.1;
  const std::size_t r = std::size_t(std::ceil(2 / (eps * eps * delta)));
  DenseMatrix e1(100, 1);
  e1(0, 0) = 1;
  int ok = 0;
  for (std::uint64_t s = 0; s < 100; ++s)
    ok += std::abs(approx_matmul(make_sketch(SketchKind::SparseEmbedding, r, 100, s), e1, e1)(0, 0) - 1) <= 1.5;
  CHECK(ok >= 90);
  const DenseMatrix a2 = gaussian_matrix(200, 3, 3), b2 = gaussian_matrix(200, 2, 4);
  const DenseMatrix exact = matmul_tn(a2, b2);
  int bad = 0;
  for (std::uint64_t s = 0; s < 500; ++s)
    bad += (approx_matmul(make_sketch(SketchKind::SparseEmbedding, r, 200, s), a2, b2) - exact).frobenius() >
           3 * eps * a2.frobenius() * b2.frobenius();
  CHECK(double(bad) / 500 <= delta);
  CHECK_THROWS_AS(approx_matmul(make_sketch(SketchKind::Identity, 50, 50, 0), a, DenseMatrix(49, 1)), Error);
}

TEST_CASE("JL moment estimates") {
  CHECK(jl_moment_estimate({SketchKind::Identity, 30, 30}, 2, 100, 1) <= 1e-24);
  const double eps = 0.5, delta = 0.1;
  const std::size_t r = std::size_t(std::ceil(2 / (eps * eps * delta)));
  CHECK(jl_moment_estimate({SketchKind::SparseEmbedding, r, 400, }, 2, 2000, 2) <= 2 * eps * eps * delta);
  const double g = jl_moment_estimate({SketchKind::Gaussian, 50, 200}, 2, 2000, 3);
  CHECK(g >= 0.04 * 0.5);
  CHECK(g <= 0.04 * 1.5);
  CHECK_THROWS_AS(jl_moment_estimate({SketchKind::Gaussian, 5, 5}, 3, 10, 1), Error);
}

TEST_CASE("boosting picks a verified embedding") {
  CHECK(boost_trial_count(0.01) == std::size_t(std::ceil(3 * std::log2(100.0))));
  const DenseMatrix q = orth(gaussian_matrix(50, 3, 5));
  const BoostedEmbedding trivial =
      boost_embedding(q, 0.5, 5, [](std::size_t) { return make_sketch(SketchKind::Identity, 50, 50, 0); });
  CHECK(trivial.chosen == 0);
  const DenseMatrix a = gaussian_matrix(300, 4, 6);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const BoostedEmbedding b = boost_embedding(a, 0.5, 20, [&](std::size_t j) {
      return make_sketch(SketchKind::SparseEmbedding, 2000, 300, derive_seed(s, j));
    });
    CHECK(verify_embedding(b.op, a).eps_obs <= 0.5);
  }
}

TEST_CASE("boosting with the default sizes") {
  const DenseMatrix a = gaussian_matrix(300, 4, 7);
  const BoostedEmbedding b = boost_embedding(a, 0.5, 0.01, 3);
  CHECK(b.trials == boost_trial_count(0.01));
  CHECK(verify_embedding(b.op, a).eps_obs <= 0.5);
}

TEST_CASE("the cross test agrees with random-direction probes") {
  const DenseMatrix a = gaussian_matrix(400, 3, 8);
  const DenseMatrix s1 = apply_sketch(make_sketch(SketchKind::SparseEmbedding, 3000, 400, 1), a);
  const DenseMatrix s2 = apply_sketch(make_sketch(SketchKind::SparseEmbedding, 3000, 400, 2), a);
  const Vector sv = cross_singular_values(s1, s2);
  double lo = INFINITY, hi = 0;
  for (double v : sv) {
    lo = std::min(lo, v * v);
    hi = std::max(hi, v * v);
  }
  for (std::uint64_t t = 0; t < 50; ++t) {
    const Vector x = gaussian_vector(3, 100 + t);
    const double r = dot(matvec(s1, x), matvec(s1, x)) / dot(matvec(s2, x), matvec(s2, x));
    CHECK(r >= lo * (1 - 1e-9));
    CHECK(r <= hi * (1 + 1e-9));
  }
}
