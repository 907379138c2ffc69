#include "snla/cur.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "snla/constants.hpp"
#include "snla/leverage.hpp"
#include "snla/linalg.hpp"
#include "snla/lowrank.hpp"
#include "snla/rng.hpp"
#include "snla/sketch.hpp"

namespace snla {

std::size_t BssWeights::nonzeros() const {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](double x) { return x > 0; }));
}

DenseMatrix CurResult::product() const { return matmul(matmul(C, U), R); }

namespace {

double phi_of(const Vector& lam, double l) {
  double s = 0;
  for (double x : lam) s += 1.0 / (x - l);
  return s;
}

double lambda_min_weighted(const DenseMatrix& v, const Vector& s) {
  const std::size_t k = v.cols();
  DenseMatrix m(k, k);
  for (std::size_t i = 0; i < v.rows(); ++i) {
    if (s[i] == 0) continue;
    const double* vi = v.row_ptr(i);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) m(a, b) += s[i] * vi[a] * vi[b];
  }
  return sym_eig(m).values.front();
}

}  // namespace

BssWeights bss_sampling(const DenseMatrix& v, const DenseMatrix& avecs, std::size_t r) {
  const std::size_t n = v.rows(), k = v.cols();
  require(avecs.rows() == n, ErrorCode::DimensionMismatch, "bss: V and A must have one row per vector");
  require(k >= 1 && k < r && r <= n, ErrorCode::InvalidArgument, "bss: need k < r <= n");
  {
    DenseMatrix g = matmul_tn(v, v);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b)
        require(std::abs(g(a, b) - (a == b ? 1.0 : 0.0)) <= 1e-8, ErrorCode::InvalidArgument,
                "bss: Σ v_i v_iᵀ is not the identity");
  }
  Vector anorm(n);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) total += (anorm[i] = dot(avecs.row(i), avecs.row(i)));
  const double root = std::sqrt(double(k) / double(r));
  const double d_low = 1.0;
  const double d_up = total > 0 ? total / (1.0 - root) : 1.0;
  const double rk = std::sqrt(double(r) * double(k));

  BssWeights out;
  out.r = r;
  out.k = k;
  out.s.assign(n, 0.0);
  out.frob_total = total;
  DenseMatrix m(k, k);
  double trace_w = 0;
  double prev_phi = std::numeric_limits<double>::infinity();
  Vector low(n);
  for (std::size_t tau = 0; tau < r; ++tau) {
    const double l = double(tau) - rk;
    const double u = double(tau) * d_up;
    EigResult e = sym_eig(m);
    require(e.values.front() > l, ErrorCode::Internal, "bss: λ_k(M) fell to L");
    const double phi = phi_of(e.values, l);
    require(phi <= prev_phi * (1 + 1e-10) + 1e-14, ErrorCode::Internal, "bss: potential increased");
    require(trace_w <= u * (1 + 1e-10) + 1e-14, ErrorCode::Internal, "bss: Tr(W) exceeded U");
    out.lower.push_back(l);
    out.upper.push_back(u);
    out.phi.push_back(phi);
    out.trace_w.push_back(trace_w);
    prev_phi = phi;
    const double lp = l + d_low;
    const double gap = phi_of(e.values, lp) - phi;
    double scale = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Vector w = matvec_t(e.vectors, v.row(i));
      double q2 = 0, q1 = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double den = e.values[c] - lp;
        q2 += w[c] * w[c] / (den * den);
        q1 += w[c] * w[c] / den;
      }
      low[i] = q2 / gap - q1;
      scale = std::max({scale, std::abs(low[i]), anorm[i] / d_up});
    }
    std::size_t pick = n;
    for (double slack : {0.0, 1e-12 * scale}) {
      for (std::size_t i = 0; i < n && pick == n; ++i)
        if (low[i] > 0 && anorm[i] / d_up <= low[i] + slack) pick = i;
      if (pick != n) break;
    }
    require(pick != n, ErrorCode::Internal, "bss: no index satisfies UP <= LOW");
    const double t = 2.0 / (anorm[pick] / d_up + low[pick]);
    out.s[pick] += t;
    const double* vj = v.row_ptr(pick);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) m(a, b) += t * vj[a] * vj[b];
    trace_w += t * anorm[pick];
  }
  const double fin = (1.0 - root) / double(r);
  for (double& x : out.s) x *= fin;
  out.lambda_k = lambda_min_weighted(v, out.s);
  for (std::size_t i = 0; i < n; ++i) out.frob_mass += out.s[i] * anorm[i];
  const double lam_bound = (1.0 - root) * (1.0 - root);
  require(out.lambda_k >= lam_bound * (1 - 1e-10), ErrorCode::Internal, "bss: exit bound on λ_k violated");
  require(out.frob_mass <= total * (1 + 1e-10), ErrorCode::Internal, "bss: exit bound on Frobenius mass violated");
  return out;
}

BssWeights bss_sampling_sparse(const DenseMatrix& v, const DenseMatrix& avecs, std::size_t r, double eps,
                               std::uint64_t seed) {
  require(eps > 0 && eps < 1, ErrorCode::InvalidArgument, "bss_sparse: eps must be in (0,1)");
  const std::size_t n = avecs.rows(), ell = avecs.cols();
  const double xi_real = double(n) * double(n) / (eps * eps);
  const std::size_t xi = xi_real >= double(ell) ? ell : static_cast<std::size_t>(std::ceil(xi_real));
  SketchOperator w = sparse_or_identity(xi, ell, seed);
  if (w.kind == SketchKind::Identity) return bss_sampling(v, avecs, r);
  return bss_sampling(v, apply_sketch(w, avecs.transpose()).transpose(), r);
}

Vector length_squares_estimate(const DenseMatrix& b, std::uint64_t seed) {
  const std::size_t m = b.rows(), n = b.cols();
  const std::size_t t = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(constants::kLengthSquaresWidth * std::log(double(std::max<std::size_t>({m, n, 2}))))));
  DenseMatrix g(t, m);
  Rng rng(seed, 61);
  const double sc = 1.0 / std::sqrt(double(t));
  for (double& x : g.data()) x = sc * rng.normal();
  DenseMatrix gb = matmul(g, b);
  Vector p(n, 0.0);
  double total = 0;
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j < n; ++j) p[j] += gb(i, j) * gb(i, j);
  for (double x : p) total += x;
  if (total > 0)
    for (double& x : p) x /= total;
  return p;
}

namespace {

std::vector<std::size_t> draw_residual(const DenseMatrix& a, const DenseMatrix& basis, double alpha, std::size_t c2,
                                       std::uint64_t seed) {
  require(alpha > 0 && alpha <= 1, ErrorCode::InvalidArgument, "adaptive_cols: alpha must be in (0,1]");
  require(basis.rows() == a.rows(), ErrorCode::DimensionMismatch, "adaptive_cols: basis rows differ from A");
  DenseMatrix b = a;
  if (basis.cols() > 0) b -= matmul(basis, matmul(pinv(basis), a));
  if (b.frobenius() <= 1e-12 * std::max(a.frobenius(), 1e-300)) return {};
  Vector p = length_squares_estimate(b, derive_seed(seed, 1));
  double total = 0;
  for (double x : p) total += x;
  if (total == 0) return {};
  SamplingPlan plan = rand_sampling(p, c2, derive_seed(seed, 2));
  return plan.indices;
}

}  // namespace

std::vector<std::size_t> adaptive_cols(const DenseMatrix& a, const DenseMatrix& v, double alpha, std::size_t c2,
                                       std::uint64_t seed) {
  return draw_residual(a, v, alpha, c2, seed);
}

std::vector<std::size_t> adaptive_cols_residual(const DenseMatrix& a, const DenseMatrix& rrows, const DenseMatrix& c1,
                                                double alpha, std::size_t c2, std::uint64_t seed) {
  require(rrows.cols() == a.cols(), ErrorCode::DimensionMismatch, "adaptive_cols_residual: R width differs from A");
  const std::size_t rho = numerical_rank(rrows);
  const DenseMatrix arr = matmul(matmul(a, pinv(rrows)), rrows);
  // rank relative to ‖A‖, so a product that is roundoff noise counts as zero
  const double cut = default_rank_tol(a.rows(), a.cols()) * spectral_norm(a);
  std::size_t arr_rank = 0;
  for (double sv : singular_values(arr)) arr_rank += sv > cut;
  require(arr_rank == rho, ErrorCode::InvalidArgument,
          "adaptive_cols_residual: rank(R) differs from rank(A R† R)");
  return draw_residual(a, c1, alpha, c2, seed);
}

std::size_t cur_leverage_samples(std::size_t k) {
  return static_cast<std::size_t>(std::ceil(constants::kCurLeverageSamples * double(k) * std::log(double(k) + 1.0)));
}

std::size_t cur_adaptive_samples(std::size_t k, double eps) {
  return static_cast<std::size_t>(std::ceil(constants::kCurAdaptive * double(k) / eps));
}

namespace {

struct Picked {
  std::vector<std::size_t> idx;
  Vector scale;
};

// Leverage sampling on the rows of an orthonormal basis z (one row per column of a),
// then BSS down to 4k with residual vectors taken from e.
Picked leverage_then_bss(const DenseMatrix& a, const DenseMatrix& z, std::size_t k, std::uint64_t seed,
                         const char* stage) {
  try {
    const std::size_t d = z.rows();
    Vector q(d);
    double tot = 0;
    for (std::size_t i = 0; i < d; ++i) tot += (q[i] = dot(z.row(i), z.row(i)));
    for (double& x : q) x /= tot;
    const std::size_t s = cur_leverage_samples(k);
    const std::size_t r = 4 * k;
    require(s > r, ErrorCode::Internal, "leverage sample count below 4k");
    SamplingPlan plan = rand_sampling(q, s, derive_seed(seed, 1));
    const DenseMatrix m = apply_plan(plan, z);  // (ZᵀΩD)ᵀ, s×k
    SvdResult f = svd(m.transpose());
    require(f.rank >= k, ErrorCode::RankDeficient, "sampled basis lost rank");
    const DenseMatrix vm = f.Vt.rows_range(0, k).transpose();
    // residual columns E = A − A Z Zᵀ at the sampled indices
    DenseMatrix e = a - matmul_nt(matmul(a, z), z);
    DenseMatrix avecs(s, a.rows());
    for (std::size_t j = 0; j < s; ++j)
      for (std::size_t i = 0; i < a.rows(); ++i) avecs(j, i) = plan.scales[j] * e(i, plan.indices[j]);
    BssWeights w = bss_sampling_sparse(vm, avecs, r, 0.5, derive_seed(seed, 2));
    Picked p;
    for (std::size_t j = 0; j < s; ++j)
      if (w.s[j] > 0) {
        p.idx.push_back(plan.indices[j]);
        p.scale.push_back(plan.scales[j] * std::sqrt(w.s[j]));
      }
    return p;
  } catch (const Error& err) {
    fail(err.code(), std::string("cur: ") + stage + ": " + err.what());
  }
}

DenseMatrix gather_cols(const DenseMatrix& a, const std::vector<std::size_t>& idx, const Vector& scale) {
  DenseMatrix c(a.rows(), idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) c(i, j) = a(i, idx[j]) * scale[j];
  return c;
}

void append_unique(Picked& p, const std::vector<std::size_t>& draws) {
  std::set<std::size_t> seen(draws.begin(), draws.end());
  for (std::size_t i : seen) {
    p.idx.push_back(i);
    p.scale.push_back(1.0);
  }
}

}  // namespace

CurResult cur_decompose(const DenseMatrix& a, std::size_t k, double eps, std::uint64_t seed) {
  require(k >= 1 && k <= std::min(a.rows(), a.cols()), ErrorCode::InvalidArgument, "cur: k out of range");
  require(eps > 0 && eps < 1, ErrorCode::InvalidArgument, "cur: eps must be in (0,1)");
  const std::size_t c2 = cur_adaptive_samples(k, eps);

  DenseMatrix z;
  try {
    z = frobenius_lowrank(a, k, constants::kCurZeps, derive_seed(seed, 1)).R.transpose();
  } catch (const Error& err) {
    fail(err.code(), std::string("cur: low-rank stage: ") + err.what());
  }
  require(z.cols() == k, ErrorCode::RankDeficient, "cur: low-rank stage returned rank below k");

  Picked cols = leverage_then_bss(a, z, k, derive_seed(seed, 2), "column BSS stage");
  CurResult out;
  out.c1 = cols.idx.size();
  {
    const DenseMatrix c1 = gather_cols(a, cols.idx, cols.scale);
    append_unique(cols, adaptive_cols(a, c1, 1.0 / 3.0, c2, derive_seed(seed, 3)));
  }
  out.C = gather_cols(a, cols.idx, cols.scale);
  out.col_indices = cols.idx;
  out.col_scales = cols.scale;

  // L′: top-k left singular vectors of CC†A·W
  DenseMatrix lp;
  {
    const DenseMatrix ortc = orth(out.C);
    const double rho = double(ortc.cols());
    const double w_real = rho * rho / (constants::kConstantDelta * 0.25);
    const std::size_t w = w_real >= double(a.cols()) ? a.cols() : static_cast<std::size_t>(std::ceil(w_real));
    SketchOperator wop = sparse_or_identity(w, a.cols(), derive_seed(seed, 4));
    const DenseMatrix aw = apply_sketch(wop, a.transpose()).transpose();
    SvdResult f = svd(matmul(ortc, matmul_tn(ortc, aw)));
    require(f.rank >= k, ErrorCode::RankDeficient, "cur: column span has rank below k");
    lp = f.U.cols_range(0, k);
  }

  const DenseMatrix at = a.transpose();
  Picked rows = leverage_then_bss(at, lp, k, derive_seed(seed, 5), "row BSS stage");
  out.r1 = rows.idx.size();
  {
    const DenseMatrix r1t = gather_cols(at, rows.idx, rows.scale);
    append_unique(rows, adaptive_cols_residual(at, lp.transpose(), r1t, 1.0 / 3.0, c2, derive_seed(seed, 6)));
  }
  out.R = gather_cols(at, rows.idx, rows.scale).transpose();
  out.row_indices = rows.idx;
  out.row_scales = rows.scale;

  // U = (C†L′)(L′ᵀ A R†)
  out.U = matmul(matmul(pinv(out.C), lp), matmul(matmul_tn(lp, a), pinv(out.R)));
  return out;
}

}  // namespace snla
