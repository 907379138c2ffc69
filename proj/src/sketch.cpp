#include "snla/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "snla/constants.hpp"
#include "snla/linalg.hpp"
#include "snla/rng.hpp"

namespace snla {

std::string kind_name(SketchKind k) {
  switch (k) {
    case SketchKind::Gaussian: return "gaussian";
    case SketchKind::SparseEmbedding: return "sparse";
    case SketchKind::SRHT: return "srht";
    case SketchKind::Sign: return "sign";
    case SketchKind::Cauchy: return "cauchy";
    case SketchKind::ExpReciprocalDiag: return "exp-diag";
    case SketchKind::Identity: return "identity";
  }
  return "?";
}

SketchKind parse_kind(const std::string& name) {
  for (auto k : {SketchKind::Gaussian, SketchKind::SparseEmbedding, SketchKind::SRHT, SketchKind::Sign,
                 SketchKind::Cauchy, SketchKind::ExpReciprocalDiag, SketchKind::Identity})
    if (kind_name(k) == name) return k;
  if (name == "countsketch") return SketchKind::SparseEmbedding;
  fail(ErrorCode::InvalidArgument, "unknown sketch kind '" + name + "'");
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

SketchOperator make_sketch(SketchKind kind, std::size_t r, std::size_t n, std::uint64_t seed, std::size_t nnz_per_col) {
  require(r >= 1 && n >= 1, ErrorCode::InvalidArgument, "sketch dimensions must be positive");
  SketchOperator s;
  s.kind = kind;
  s.r = r;
  s.n = n;
  s.seed = seed;
  switch (kind) {
    case SketchKind::Identity:
      require(r == n, ErrorCode::InvalidArgument, "identity sketch needs r = n");
      break;
    case SketchKind::SparseEmbedding: {
      require(nnz_per_col >= 1 && nnz_per_col <= r, ErrorCode::InvalidArgument, "nnz_per_col must be in [1, r]");
      s.nnz_per_col = nnz_per_col;
      s.wasteful = r > n;
      s.hash.resize(n * nnz_per_col);
      s.signs.resize(n * nnz_per_col);
      const std::uint64_t hkey = derive_seed(seed, 1), skey = derive_seed(seed, 2);
      for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t ctr = i * nnz_per_col * 4;
        for (std::size_t l = 0; l < nnz_per_col; ++l) {
          std::uint32_t h;
          bool fresh;
          do {
            h = static_cast<std::uint32_t>(counter_hash(hkey, ctr++) % r);
            fresh = std::find(s.hash.begin() + i * nnz_per_col, s.hash.begin() + i * nnz_per_col + l, h) ==
                    s.hash.begin() + i * nnz_per_col + l;
          } while (!fresh);
          s.hash[i * nnz_per_col + l] = h;
          s.signs[i * nnz_per_col + l] = (counter_hash(skey, i * nnz_per_col + l) >> 63) ? 1 : -1;
        }
      }
      break;
    }
    case SketchKind::SRHT: {
      s.n_pad = next_pow2(n);
      require(r <= s.n_pad, ErrorCode::InvalidArgument, "SRHT needs r <= next power of two >= n");
      Rng rng(seed, 3);
      s.diag_signs.resize(s.n_pad);
      for (auto& d : s.diag_signs) d = rng.sign() > 0 ? 1 : -1;
      std::vector<std::size_t> perm(s.n_pad);
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t i = 0; i < r; ++i) std::swap(perm[i], perm[i + rng.index(s.n_pad - i)]);
      s.sampled_rows.assign(perm.begin(), perm.begin() + r);
      break;
    }
    case SketchKind::ExpReciprocalDiag: {
      require(r == n, ErrorCode::InvalidArgument, "exponential diagonal needs r = n");
      Rng rng(seed, 4);
      s.diag.resize(n);
      for (auto& d : s.diag) d = 1.0 / rng.exponential();
      break;
    }
    case SketchKind::Gaussian:
    case SketchKind::Sign:
    case SketchKind::Cauchy: {
      Rng rng(seed, 5);
      s.dense = DenseMatrix(r, n);
      const double g = 1.0 / std::sqrt(static_cast<double>(r));
      for (double& v : s.dense.data()) {
        if (kind == SketchKind::Gaussian)
          v = g * rng.normal();
        else if (kind == SketchKind::Sign)
          v = g * rng.sign();
        else
          v = rng.cauchy();
      }
      break;
    }
  }
  return s;
}

SketchOperator sparse_or_identity(std::size_t r, std::size_t n, std::uint64_t seed) {
  if (r >= n) return make_sketch(SketchKind::Identity, n, n, seed);
  return make_sketch(SketchKind::SparseEmbedding, r, n, seed);
}

void fwht_rows(DenseMatrix& a) {
  const std::size_t n = a.rows(), d = a.cols();
  for (std::size_t h = 1; h < n; h <<= 1)
    for (std::size_t i = 0; i < n; i += 2 * h)
      for (std::size_t j = i; j < i + h; ++j) {
        double* x = a.row_ptr(j);
        double* y = a.row_ptr(j + h);
        for (std::size_t c = 0; c < d; ++c) {
          const double u = x[c], v = y[c];
          x[c] = u + v;
          y[c] = u - v;
        }
      }
}

DenseMatrix apply_sketch(const SketchOperator& s, const DenseMatrix& a) {
  require(a.rows() == s.n, ErrorCode::DimensionMismatch,
          "sketch in_dim " + std::to_string(s.n) + " vs matrix rows " + std::to_string(a.rows()));
  const std::size_t d = a.cols();
  switch (s.kind) {
    case SketchKind::Identity: return a;
    case SketchKind::SparseEmbedding: {
      DenseMatrix out(s.r, d);
      const double w = 1.0 / std::sqrt(static_cast<double>(s.nnz_per_col));
      for (std::size_t i = 0; i < s.n; ++i) {
        const double* ai = a.row_ptr(i);
        for (std::size_t l = 0; l < s.nnz_per_col; ++l) {
          const std::size_t p = i * s.nnz_per_col + l;
          const double v = s.signs[p] * w;
          double* o = out.row_ptr(s.hash[p]);
          for (std::size_t c = 0; c < d; ++c) o[c] += v * ai[c];
        }
      }
      return out;
    }
    case SketchKind::SRHT: {
      DenseMatrix pad(s.n_pad, d);
      for (std::size_t i = 0; i < s.n; ++i) {
        const double sg = s.diag_signs[i];
        const double* ai = a.row_ptr(i);
        double* pi = pad.row_ptr(i);
        for (std::size_t c = 0; c < d; ++c) pi[c] = sg * ai[c];
      }
      fwht_rows(pad);
      DenseMatrix out = pad.select_rows(s.sampled_rows);
      out *= 1.0 / std::sqrt(static_cast<double>(s.r));
      return out;
    }
    case SketchKind::ExpReciprocalDiag: {
      DenseMatrix out = a;
      for (std::size_t i = 0; i < s.n; ++i) {
        double* o = out.row_ptr(i);
        for (std::size_t c = 0; c < d; ++c) o[c] *= s.diag[i];
      }
      return out;
    }
    case SketchKind::Gaussian:
    case SketchKind::Sign:
    case SketchKind::Cauchy: return matmul(s.dense, a);
  }
  fail(ErrorCode::Internal, "unhandled sketch kind");
}

DenseMatrix apply_sketch(const SketchOperator& s, const SparseMatrix& a) {
  require(a.rows() == s.n, ErrorCode::DimensionMismatch,
          "sketch in_dim " + std::to_string(s.n) + " vs matrix rows " + std::to_string(a.rows()));
  switch (s.kind) {
    case SketchKind::SparseEmbedding: {
      DenseMatrix out(s.r, a.cols());
      const double w = 1.0 / std::sqrt(static_cast<double>(s.nnz_per_col));
      const auto& rs = a.row_start();
      for (std::size_t i = 0; i < s.n; ++i)
        for (std::size_t q = rs[i]; q < rs[i + 1]; ++q)
          for (std::size_t l = 0; l < s.nnz_per_col; ++l) {
            const std::size_t p = i * s.nnz_per_col + l;
            out(s.hash[p], a.col_index()[q]) += s.signs[p] * w * a.values()[q];
          }
      return out;
    }
    case SketchKind::Gaussian:
    case SketchKind::Sign:
    case SketchKind::Cauchy: return matmul_tn(a, s.dense.transpose()).transpose();
    default: return apply_sketch(s, a.to_dense());
  }
}

Vector apply_sketch(const SketchOperator& s, std::span<const double> x) {
  return apply_sketch(s, DenseMatrix::column(x)).data();
}

DenseMatrix sketch_matrix(const SketchOperator& s) { return apply_sketch(s, DenseMatrix::identity(s.n)); }

EmbeddingReport verify_embedding(const SketchOperator& s, const DenseMatrix& a, double basis_tol) {
  SvdResult f = svd(a, basis_tol);
  require(f.rank > 0, ErrorCode::InvalidArgument, "verify_embedding: matrix has rank 0");
  Vector sv = singular_values(apply_sketch(s, f.U));
  sv.resize(f.rank, 0.0);
  EmbeddingReport rep;
  rep.sigma = sv;
  for (double x : sv) rep.eps_obs = std::max(rep.eps_obs, std::abs(x * x - 1.0));
  return rep;
}

DenseMatrix approx_matmul(const SketchOperator& s, const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows(), ErrorCode::DimensionMismatch, "approx_matmul: A and B row counts differ");
  return matmul_tn(apply_sketch(s, a), apply_sketch(s, b));
}

double jl_moment_estimate(const SketchFamily& family, int ell, std::size_t trials, std::uint64_t seed) {
  require(ell == 2 || ell == 4, ErrorCode::InvalidArgument, "moment order must be 2 or 4");
  require(trials >= 1, ErrorCode::InvalidArgument, "need at least one trial");
  const Vector x(family.n, 1.0 / std::sqrt(static_cast<double>(family.n)));
  double acc = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    SketchOperator s = make_sketch(family.kind, family.r, family.n, derive_seed(seed, t));
    Vector sx = apply_sketch(s, x);
    const double dev = std::abs(dot(sx, sx) - 1.0);
    acc += std::pow(dev, ell);
  }
  return acc / static_cast<double>(trials);
}

std::size_t boost_trial_count(double delta) {
  return static_cast<std::size_t>(std::ceil(constants::kBoostTrials * std::log2(1.0 / delta)));
}

std::size_t boost_rows(std::size_t d, double eps) {
  const double e = eps / 6.0;
  return static_cast<std::size_t>(std::ceil(double(d) * double(d) / (constants::kConstantDelta * e * e)));
}

Vector cross_singular_values(const DenseMatrix& sa_j, const DenseMatrix& sa_k) {
  SvdResult fj = svd(sa_j), fk = svd(sa_k);
  if (fj.rank != fk.rank || fj.rank == 0) return {};
  // D_j V_jᵀ V_k D_k⁻¹
  DenseMatrix m = matmul_nt(fj.Vt, fk.Vt);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t c = 0; c < m.cols(); ++c) m(i, c) *= fj.sigma[i] / fk.sigma[c];
  return singular_values(m);
}

BoostedEmbedding boost_embedding(const DenseMatrix& a, double eps, std::size_t trials,
                                 const std::function<SketchOperator(std::size_t)>& make) {
  require(eps > 0 && eps < 1, ErrorCode::InvalidArgument, "boost_embedding: eps must be in (0,1)");
  require(trials >= 1, ErrorCode::InvalidArgument, "boost_embedding: need at least one trial");
  std::vector<SketchOperator> ops;
  std::vector<DenseMatrix> sa;
  for (std::size_t j = 0; j < trials; ++j) {
    ops.push_back(make(j));
    sa.push_back(apply_sketch(ops.back(), a));
  }
  const std::size_t need = trials / 2;
  for (std::size_t j = 0; j < trials; ++j) {
    std::size_t agree = 0;
    for (std::size_t k = 0; k < trials; ++k) {
      if (k == j) continue;
      Vector sv = cross_singular_values(sa[j], sa[k]);
      bool ok = !sv.empty();
      for (double s : sv) ok = ok && std::abs(s - 1.0) <= eps / 2.0;
      if (ok) ++agree;
    }
    if (agree >= need) return {ops[j], sa[j], j, trials};
  }
  fail(ErrorCode::NotConverged, "boost_embedding: no candidate passed the cross-validation test");
}

BoostedEmbedding boost_embedding(const DenseMatrix& a, double eps, double delta, std::uint64_t seed) {
  require(delta > 0 && delta < 1, ErrorCode::InvalidArgument, "boost_embedding: delta must be in (0,1)");
  const std::size_t t = boost_trial_count(delta);
  const std::size_t r = boost_rows(a.cols(), eps);
  return boost_embedding(a, eps, t, [&](std::size_t j) {
    return make_sketch(SketchKind::SparseEmbedding, r, a.rows(), derive_seed(seed, 100 + j));
  });
}

}  // namespace snla
