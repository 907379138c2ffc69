#include "snla/lowrank.hpp"

#include <cmath>

#include "snla/constants.hpp"
#include "snla/linalg.hpp"
#include "snla/rng.hpp"
#include "snla/sketch.hpp"

namespace snla {

DenseMatrix FactoredLowRank::dense() const { return matmul(matmul(L, U), R); }

namespace {

void check_orthonormal_rows(const DenseMatrix& ut) {
  DenseMatrix g = matmul_nt(ut, ut);
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j)
      require(std::abs(g(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-8, ErrorCode::InvalidArgument,
              "row basis is not orthonormal");
}

// X = P·diag(σ)·Qᵀ → L = left·P, U = diag(σ), R = Qᵀ·right
FactoredLowRank refactor(const DenseMatrix& left, const DenseMatrix& middle, std::size_t k) {
  SvdResult f = svd(middle);
  const std::size_t kk = std::min(k, f.rank);
  FactoredLowRank out;
  out.k = k;
  out.L = matmul(left, f.U.cols_range(0, kk));
  out.U = DenseMatrix::diag(std::span<const double>(f.sigma.data(), kk));
  out.R = f.Vt.rows_range(0, kk);
  return out;
}

template <class RowFn>
double streamed_norm(std::size_t rows, std::size_t cols, RowFn row_of, bool spectral) {
  RowAccumulator acc(cols);
  Vector buf(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    row_of(i, buf);
    acc.add_row(buf);
  }
  return spectral ? acc.spectral_norm() : std::sqrt(acc.frobenius_sq());
}

}  // namespace

FactoredLowRank best_rank_k_in_rowspace(const DenseMatrix& a, const DenseMatrix& ut, std::size_t k) {
  require(ut.cols() == a.cols(), ErrorCode::DimensionMismatch, "row basis width differs from A");
  require(k >= 1 && k <= ut.rows(), ErrorCode::InvalidArgument, "k must be in [1, rows(Ut)]");
  check_orthonormal_rows(ut);
  const DenseMatrix au = matmul_nt(a, ut);
  SvdResult f = svd(au);
  const std::size_t kk = std::min(k, f.rank);
  FactoredLowRank out;
  out.k = k;
  out.L = f.U.cols_range(0, kk);
  out.U = DenseMatrix::diag(std::span<const double>(f.sigma.data(), kk));
  out.R = matmul(f.Vt.rows_range(0, kk), ut);
  return out;
}

std::size_t lowrank_left_rows(std::size_t k, double eps) {
  return static_cast<std::size_t>(std::ceil(double(k) * double(k) + double(k) / eps));
}

FactoredLowRank frobenius_lowrank(const DenseMatrix& a, std::size_t k, double eps, std::uint64_t seed) {
  require(k >= 1, ErrorCode::InvalidArgument, "k must be at least 1");
  require(eps > 0 && eps < 1, ErrorCode::InvalidArgument, "eps must be in (0,1)");
  const std::size_t n = a.rows(), d = a.cols();
  require(k <= std::min(n, d), ErrorCode::InvalidArgument, "k exceeds min(n, d)");
  const std::size_t m = lowrank_left_rows(k, eps);
  const double w_real = double(m) * double(m) / (constants::kConstantDelta * eps * eps);
  const std::size_t w = w_real >= double(d) ? d : static_cast<std::size_t>(std::ceil(w_real));
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::uint64_t sd = derive_seed(seed, 300 + attempt);
    SketchOperator s = sparse_or_identity(m, n, derive_seed(sd, 1));
    SketchOperator r = sparse_or_identity(w, d, derive_seed(sd, 2));
    const DenseMatrix sa = apply_sketch(s, a);
    const DenseMatrix ar = apply_sketch(r, a.transpose()).transpose();
    const DenseMatrix sar = apply_sketch(s, ar);
    SvdResult fs = svd(sar);
    if (fs.rank < k) continue;
    // U spans the row space of SAR
    const DenseMatrix& ut = fs.Vt;
    SvdResult fx = svd(matmul_nt(ar, ut));
    if (fx.rank < k) continue;
    const DenseMatrix uk = fx.U.cols_range(0, k);
    DenseMatrix middle = matmul(fx.Vt.rows_range(0, k), matmul(ut, matmul(pinv(sar), sa)));
    for (std::size_t i = 0; i < k; ++i) {
      double* row = middle.row_ptr(i);
      for (std::size_t j = 0; j < d; ++j) row[j] *= fx.sigma[i];
    }
    return refactor(uk, middle, k);
  }
  fail(ErrorCode::RankDeficient, "frobenius_lowrank: sketched rank below k after reseed");
}

std::size_t power_iterations(std::size_t m, std::size_t n, double eps) {
  return static_cast<std::size_t>(std::ceil(constants::kPowerIters * std::log(double(m) * double(n)) / eps));
}

PowerResult spectral_lowrank_power_q(const DenseMatrix& a, std::size_t k, std::size_t q, std::uint64_t seed) {
  const std::size_t m = a.rows(), d = a.cols();
  require(k >= 1 && k <= std::min(m, d), ErrorCode::InvalidArgument, "k must be in [1, min(n, d)]");
  for (int attempt = 0; attempt < 2; ++attempt) {
    Rng rng(derive_seed(seed, 400 + attempt), 0);
    DenseMatrix g(d, k);
    for (double& v : g.data()) v = rng.normal();
    // (AAᵀ)^q·A·G with re-orthonormalization between products
    DenseMatrix y = matmul(a, g);
    bool ok = true;
    auto reorth = [&](DenseMatrix& x) {
      QrResult f = qr(x);
      if (f.rank_deficient) ok = false;
      x = std::move(f.Q);
    };
    reorth(y);
    for (std::size_t it = 0; it < q && ok; ++it) {
      DenseMatrix t = matmul_tn(a, y);
      reorth(t);
      if (!ok) break;
      y = matmul(a, t);
      reorth(y);
    }
    if (!ok) continue;
    PowerResult out;
    out.q = q;
    out.Z = std::move(y);
    out.approx.k = k;
    out.approx.L = out.Z;
    out.approx.U = DenseMatrix::identity(k);
    out.approx.R = matmul_tn(out.Z, a);
    return out;
  }
  fail(ErrorCode::RankDeficient, "spectral_lowrank_power: Y rank-deficient after reseed");
}

PowerResult spectral_lowrank_power(const DenseMatrix& a, std::size_t k, double eps, std::uint64_t seed) {
  require(eps > 0 && eps < 1, ErrorCode::InvalidArgument, "eps must be in (0,1)");
  return spectral_lowrank_power_q(a, k, power_iterations(a.rows(), a.cols(), eps), seed);
}

double project_residual_norm(const DenseMatrix& a, const DenseMatrix& z, bool spectral) {
  require(z.rows() == a.rows(), ErrorCode::DimensionMismatch, "Z rows differ from A rows");
  const DenseMatrix zta = matmul_tn(z, a);
  FactoredLowRank f;
  f.L = z;
  f.U = DenseMatrix::identity(z.cols());
  f.R = zta;
  f.k = z.cols();
  return residual_norm(a, f, spectral);
}

double residual_norm(const DenseMatrix& a, const FactoredLowRank& f, bool spectral) {
  const DenseMatrix lu = matmul(f.L, f.U);
  const std::size_t n = a.rows(), d = a.cols(), k = lu.cols();
  require(lu.rows() == n && f.R.cols() == d && f.R.rows() == k, ErrorCode::DimensionMismatch,
          "factor shapes do not match A");
  if (d <= n) {
    return streamed_norm(
        n, d,
        [&](std::size_t i, Vector& out) {
          for (std::size_t j = 0; j < d; ++j) {
            double s = a(i, j);
            for (std::size_t l = 0; l < k; ++l) s -= lu(i, l) * f.R(l, j);
            out[j] = s;
          }
        },
        spectral);
  }
  return streamed_norm(
      d, n,
      [&](std::size_t j, Vector& out) {
        for (std::size_t i = 0; i < n; ++i) {
          double s = a(i, j);
          for (std::size_t l = 0; l < k; ++l) s -= lu(i, l) * f.R(l, j);
          out[i] = s;
        }
      },
      spectral);
}

}  // namespace snla
