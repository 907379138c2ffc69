#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "oracle.hpp"
#include "snla/distributed.hpp"
#include "snla/generate.hpp"
#include "snla/linalg.hpp"

using namespace snla;

namespace {

// shares summing to A: Gaussian pieces plus one balancing share
std::vector<DenseMatrix> split(const DenseMatrix& a, std::size_t s, std::uint64_t seed) {
  std::vector<DenseMatrix> out;
  DenseMatrix rest = a;
  for (std::size_t t = 0; t + 1 < s; ++t) {
    out.push_back(gaussian_matrix(a.rows(), a.cols(), seed + t));
    rest -= out.back();
  }
  out.push_back(rest);
  return out;
}

oracle::Mat projector(const DenseMatrix& v) {
  const oracle::Mat e = oracle::to_eigen(v);
  return e * e.transpose();
}

}  // namespace

TEST_CASE("k-wise sign matrix entries and seeds") {
  const auto c = KWiseSignMatrix::draw_coefficients(4, 9);
  CHECK(c.size() == 4);
  CHECK(c == KWiseSignMatrix::draw_coefficients(4, 9));
  CHECK(c != KWiseSignMatrix::draw_coefficients(4, 10));
  const KWiseSignMatrix s(5, 7, c);
  const DenseMatrix m = s.dense();
  for (double x : m.data()) CHECK(std::abs(x) == doctest::Approx(1 / std::sqrt(5.0)));
  const DenseMatrix a = gaussian_matrix(7, 3, 1);
  CHECK((s.apply(a) - matmul(m, a)).max_abs() == 0.0);
  CHECK_THROWS_AS(KWiseSignMatrix(2, 2, {}), Error);
  CHECK_THROWS_AS(KWiseSignMatrix(2, 2, {(std::uint64_t{1} << 61) - 1}), Error);
  CHECK_THROWS_AS(s.apply(gaussian_matrix(6, 3, 1)), Error);
}

TEST_CASE("pairwise-independent signs are balanced and uncorrelated") {
  const int trials = 20000;
  double mean = 0, corr = 0, corr4 = 0;
  for (int t = 0; t < trials; ++t) {
    const KWiseSignMatrix s(1, 8, KWiseSignMatrix::draw_coefficients(4, 1000 + t));
    mean += s.entry(0, 2) / trials;
    corr += s.entry(0, 2) * s.entry(0, 5) / trials;
    corr4 += s.entry(0, 1) * s.entry(0, 3) * s.entry(0, 4) * s.entry(0, 7) / trials;
  }
  const double band = 5 / std::sqrt(double(trials));
  CHECK(std::abs(mean) < band);
  CHECK(std::abs(corr) < band);
  CHECK(std::abs(corr4) < band);
}

TEST_CASE("protocol sizes and the word formula") {
  CHECK(compress_sketch_rows(2, 0.5) == 10);
  CHECK(compress_embedding_rows(2, 0.5) == 16);
  CHECK(compress_expected_words(3, 40, 2, 0.5, false) == 2 * (4 + 800 + 160 + 20));
  CHECK(compress_expected_words(3, 40, 2, 0.5, true) == 2 * (4 + 800 + 160 + 160));
  // m is capped by d
  CHECK(compress_expected_words(2, 6, 2, 0.5, false) == 4 + 72 + 96 + 12);
  CHECK(compress_expected_words(1, 40, 2, 0.5, false) == 0);
}

TEST_CASE("ledger counts every message and matches the formula") {
  const DenseMatrix a = planted_rank_matrix(100, 40, 2, 0.1, 3);
  for (bool integer_safe : {false, true}) {
    std::size_t tapped = 0, tapped_words = 0;
    CompressOptions opts;
    opts.integer_safe = integer_safe;
    opts.wiretap = [&](const Message& m) {
      ++tapped;
      tapped_words += m.words();
      CHECK(m.from != m.to);
      CHECK((m.from == 0 || m.to == 0));
    };
    const CompressResult r = adaptive_compress(split(a, 4, 10), 2, 0.5, 7, opts);
    CHECK(r.ledger.total_words() == compress_expected_words(4, 40, 2, 0.5, integer_safe));
    CHECK(tapped == r.ledger.records().size());
    CHECK(tapped_words == r.ledger.total_words());
    std::map<std::string, std::size_t> by_tag;
    for (const auto& rec : r.ledger.records()) by_tag[rec.tag] += rec.words;
    for (const auto& [tag, w] : by_tag) CHECK(r.ledger.words_with_tag(tag) == w);
    CHECK(by_tag["seed_S"] == 3 * 2);
    CHECK(by_tag["seed_P"] == 3 * 2);
    CHECK(by_tag["SA_t"] == 3 * r.m * 40);
    if (integer_safe) {
      CHECK(by_tag.count("U") == 0);
      CHECK(by_tag.count("V") == 0);
      CHECK(by_tag["SA"] == 3 * r.m * 40);
      CHECK(by_tag["PA_t_SAt"] == 3 * r.p * r.m);
      CHECK(by_tag["PA_SAt"] == 3 * r.p * r.m);
    } else {
      CHECK(by_tag["U"] == 3 * r.m * 40);
      CHECK(by_tag["PA_tU"] == 3 * r.p * r.m);
      CHECK(by_tag["V"] == 3 * r.m * 2);
    }
    const std::string csv = r.ledger.to_csv();
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line == "from,to,round,words,tag");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == r.ledger.records().size());
  }
}

TEST_CASE("servers agree on the projection") {
  const DenseMatrix a = planted_rank_matrix(80, 30, 3, 0.1, 4);
  for (bool integer_safe : {false, true}) {
    CompressOptions opts;
    opts.integer_safe = integer_safe;
    const CompressResult r = adaptive_compress(split(a, 5, 20), 3, 0.5, 2, opts);
    const DenseMatrix uv0 = matmul(r.servers[0].U, r.servers[0].V);
    for (const auto& st : r.servers) {
      CHECK(st.s_seed == r.servers[0].s_seed);
      CHECK(st.p_seed == r.servers[0].p_seed);
      const DenseMatrix uv = matmul(st.U, st.V);
      CHECK((uv - uv0).max_abs() <= (integer_safe ? 1e-10 : 0.0));
    }
    // UV has orthonormal columns
    const oracle::Mat g = oracle::to_eigen(matmul_tn(uv0, uv0));
    CHECK((g - oracle::Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("both variants produce the same approximation") {
  const DenseMatrix a = planted_rank_matrix(80, 30, 3, 0.1, 5);
  const auto shares = split(a, 3, 30);
  CompressOptions safe;
  safe.integer_safe = true;
  const DenseMatrix c1 = adaptive_compress(shares, 3, 0.5, 1).combined();
  const DenseMatrix c2 = adaptive_compress(shares, 3, 0.5, 1, safe).combined();
  CHECK((c1 - c2).max_abs() <= 1e-8 * a.max_abs());
}

TEST_CASE("the result ignores the order of the shares") {
  const DenseMatrix a = planted_rank_matrix(60, 25, 2, 0.1, 6);
  auto shares = split(a, 4, 40);
  const DenseMatrix base = adaptive_compress(shares, 2, 0.5, 3).combined();
  std::reverse(shares.begin(), shares.end());
  CHECK(adaptive_compress(shares, 2, 0.5, 3).combined().data() == base.data());
  std::swap(shares[0], shares[2]);
  CHECK(adaptive_compress(shares, 2, 0.5, 3).combined().data() == base.data());
}

TEST_CASE("a single server sends nothing") {
  const DenseMatrix a = planted_rank_matrix(60, 25, 2, 0.05, 7);
  const CompressResult r = adaptive_compress({a}, 2, 0.5, 4);
  CHECK(r.ledger.total_words() == 0);
  CHECK(r.ledger.records().empty());
  CHECK((r.combined() - a).frobenius() <= 1.5 * tail_norm(a, 2, false));
}

TEST_CASE("combined output is near the best rank k") {
  const DenseMatrix a = planted_rank_matrix(150, 50, 3, 0.5, 8);
  const double opt = tail_norm(a, 3, false);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DenseMatrix c = adaptive_compress(split(a, 3, 50 + seed), 3, 0.5, seed).combined();
    CHECK(numerical_rank(c) <= 3);
    ok += (c - a).frobenius() <= 1.5 * opt;
  }
  CHECK(ok >= 8);
}

TEST_CASE("protocol rejects bad inputs") {
  const DenseMatrix a = gaussian_matrix(20, 10, 1);
  CHECK_THROWS_AS(adaptive_compress({}, 2, 0.5, 1), Error);
  CHECK_THROWS_AS(adaptive_compress({a}, 0, 0.5, 1), Error);
  CHECK_THROWS_AS(adaptive_compress({a}, 2, 1.5, 1), Error);
  CHECK_THROWS_AS(adaptive_compress({a, gaussian_matrix(20, 9, 2)}, 2, 0.5, 1), Error);
  CHECK_THROWS_AS(adaptive_compress({a}, 11, 0.5, 1), Error);
}

TEST_CASE("sketch SVD projection spans the top right singular vectors") {
  const DenseMatrix sa = gaussian_matrix(12, 30, 9);
  const DenseMatrix v = sketch_svd_projection(sa, 4);
  CHECK(v.rows() == 30);
  CHECK(v.cols() == 4);
  Eigen::JacobiSVD<oracle::Mat> ref(oracle::to_eigen(sa), Eigen::ComputeThinV);
  const oracle::Mat vr = ref.matrixV().leftCols(4);
  CHECK((projector(v) - vr * vr.transpose()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK_THROWS_AS(sketch_svd_projection(sa, 13), Error);
  CHECK_THROWS_AS(sketch_svd_projection(planted_rank_matrix(12, 30, 2, 0.0, 1), 3), Error);
}

TEST_CASE("low-degree sign matrices are well conditioned for a fixed seed") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const KWiseSignMatrix s(10, 100, KWiseSignMatrix::draw_coefficients(2, seed));
    const Vector sv = singular_values(s.dense());
    // a 10×100 matrix of independent ±1/√10 signs has singular values near √10 ± 1
    CHECK(sv.back() > 1.0);
    CHECK(sv.front() < 5.5);
  }
}
