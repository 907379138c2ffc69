#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "snla/constants.hpp"
#include "snla/linalg.hpp"
#include "snla/regress.hpp"
#include "snla/rng.hpp"

namespace snla {

namespace {

Vector residual(const DenseMatrix& a, std::span<const double> x, std::span<const double> b) {
  Vector r = matvec(a, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

// Householder on [A b] in place; back-substitutes R x = (Qᵀb)_{1..d}.
std::optional<Vector> householder_ls(DenseMatrix& ab) {
  const std::size_t n = ab.rows(), d = ab.cols() - 1;
  if (n < d) return std::nullopt;
  Vector v(n);
  double rmax = 0;
  for (std::size_t j = 0; j < d; ++j) {
    double norm = 0;
    for (std::size_t i = j; i < n; ++i) norm += ab(i, j) * ab(i, j);
    norm = std::sqrt(norm);
    if (norm == 0) return std::nullopt;
    const double alpha = ab(j, j) > 0 ? -norm : norm;
    double vnorm = 0;
    for (std::size_t i = j; i < n; ++i) {
      v[i] = ab(i, j) - (i == j ? alpha : 0.0);
      vnorm += v[i] * v[i];
    }
    if (vnorm > 0)
      for (std::size_t c = j; c <= d; ++c) {
        double s = 0;
        for (std::size_t i = j; i < n; ++i) s += v[i] * ab(i, c);
        s *= 2.0 / vnorm;
        for (std::size_t i = j; i < n; ++i) ab(i, c) -= s * v[i];
      }
    rmax = std::max(rmax, std::abs(ab(j, j)));
  }
  Vector x(d);
  for (std::size_t j = d; j-- > 0;) {
    if (std::abs(ab(j, j)) <= 1e-12 * rmax) return std::nullopt;
    double s = ab(j, d);
    for (std::size_t c = j + 1; c < d; ++c) s -= ab(j, c) * x[c];
    x[j] = s / ab(j, j);
  }
  return x;
}

// least squares on rows scaled by sqrt(w)
Vector weighted_ls(const DenseMatrix& a, std::span<const double> b, std::span<const double> w) {
  const std::size_t n = a.rows(), d = a.cols();
  DenseMatrix ab(n, d + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::sqrt(w[i]);
    const double* src = a.row_ptr(i);
    double* dst = ab.row_ptr(i);
    for (std::size_t j = 0; j < d; ++j) dst[j] = src[j] * s;
    dst[d] = b[i] * s;
  }
  if (auto x = householder_ls(ab)) return *x;
  DenseMatrix aw = a;
  Vector bw(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::sqrt(w[i]);
    for (std::size_t j = 0; j < d; ++j) aw(i, j) *= s;
    bw[i] *= s;
  }
  return matvec(pinv(aw), bw);
}

// Rows with the smallest residuals that form an invertible d×d block.
std::vector<std::size_t> pick_vertex(const DenseMatrix& a, std::span<const double> r) {
  const std::size_t n = a.rows(), d = a.cols();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return std::abs(r[x]) < std::abs(r[y]); });
  std::vector<Vector> basis;
  std::vector<std::size_t> pick;
  double scale = a.max_abs();
  for (std::size_t i : order) {
    Vector v(a.row(i).begin(), a.row(i).end());
    const double nv = norm2(v);
    if (nv <= 1e-300) continue;
    for (const auto& q : basis) {
      const double c = dot(v, q);
      for (std::size_t j = 0; j < d; ++j) v[j] -= c * q[j];
    }
    const double nr = norm2(v);
    if (nr <= 1e-10 * std::max(nv, 1e-300 * scale)) continue;
    for (double& x : v) x /= nr;
    basis.push_back(std::move(v));
    pick.push_back(i);
    if (pick.size() == d) break;
  }
  return pick;
}

// Exact descent over interpolating vertices (each step moves off one active row
// along the edge that most reduces Σ|r_i|, found as a weighted median).
bool vertex_descent(const DenseMatrix& a, std::span<const double> b, Vector& x, double& cost) {
  const std::size_t n = a.rows(), d = a.cols();
  Vector r = residual(a, x, b);
  std::vector<std::size_t> active = pick_vertex(a, r);
  if (active.size() < d) return false;
  auto solve_vertex = [&](const std::vector<std::size_t>& act) -> std::optional<Vector> {
    DenseMatrix ai = a.select_rows(act);
    Vector bi(d);
    for (std::size_t k = 0; k < d; ++k) bi[k] = b[act[k]];
    return solve_square(ai, bi);
  };
  auto xv = solve_vertex(active);
  if (!xv) return false;
  Vector vx = *xv;
  double vcost = norm1(residual(a, vx, b));
  bool improved = false;
  if (vcost < cost) {
    x = vx;
    cost = vcost;
    improved = true;
  }
  std::vector<std::pair<double, double>> bps;
  for (std::size_t step = 0; step < 20 * n + 100; ++step) {
    r = residual(a, vx, b);
    DenseMatrix ai = a.select_rows(active);
    bool moved = false;
    for (std::size_t k = 0; k < d && !moved; ++k) {
      Vector ek(d, 0.0);
      ek[k] = 1.0;
      auto dir0 = solve_square(ai, ek);
      if (!dir0) return improved;
      for (double sgn : {1.0, -1.0}) {
        Vector dir = *dir0;
        for (double& v : dir) v *= sgn;
        Vector g = matvec(a, dir);
        double slope = 0;
        bps.clear();
        for (std::size_t i = 0; i < n; ++i) {
          if (std::find(active.begin(), active.end(), i) != active.end() && i != active[k]) continue;
          if (i == active[k]) {
            slope += std::abs(g[i]);
            continue;
          }
          if (g[i] == 0.0) continue;
          if (r[i] == 0.0) {
            slope += std::abs(g[i]);
            continue;
          }
          slope += g[i] * (r[i] > 0 ? 1.0 : -1.0);
          const double t = -r[i] / g[i];
          if (t > 0) bps.push_back({t, double(i)});
        }
        if (slope >= -1e-14 * (std::abs(slope) + 1.0)) continue;
        std::sort(bps.begin(), bps.end());
        std::size_t enter = n;
        for (const auto& [t, idx] : bps) {
          slope += 2.0 * std::abs(g[static_cast<std::size_t>(idx)]);
          if (slope >= 0) {
            enter = static_cast<std::size_t>(idx);
            break;
          }
        }
        if (enter == n) continue;  // unbounded direction cannot occur for convex ℓ1 with full rank
        std::vector<std::size_t> next = active;
        next[k] = enter;
        auto nx = solve_vertex(next);
        if (!nx) continue;
        const double nc = norm1(residual(a, *nx, b));
        if (nc < vcost * (1 - 1e-15)) {
          active = std::move(next);
          vx = *nx;
          vcost = nc;
          moved = true;
          break;
        }
      }
    }
    if (vcost < cost) {
      x = vx;
      cost = vcost;
      improved = true;
    }
    if (!moved) break;
  }
  return improved;
}

}  // namespace

L1Solution solve_l1_small(const DenseMatrix& a, std::span<const double> b, double tol) {
  require(a.rows() == b.size(), ErrorCode::DimensionMismatch, "solve_l1_small: b length mismatch");
  require(a.rows() <= 10000, ErrorCode::InvalidArgument, "solve_l1_small is for instances with at most 1e4 rows");
  const std::size_t n = a.rows(), d = a.cols();
  L1Solution sol;
  Vector w(n, 1.0);
  Vector x = weighted_ls(a, b, w);
  Vector best = x;
  double best_cost = norm1(residual(a, x, b));
  const double bnorm = norm1(b);
  double mu = bnorm / double(n);
  if (bnorm == 0.0) {
    sol.x = Vector(d, 0.0);
    sol.cost = 0.0;
    return sol;
  }
  const double floor_cost = 1e-15 * bnorm;
  std::size_t iters = 0;
  const std::size_t cap = 3000;
  while (best_cost > floor_cost && iters < cap) {
    for (int inner = 0; inner < 40 && iters < cap; ++inner) {
      Vector r = residual(a, x, b);
      for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::max(std::abs(r[i]), mu);
      Vector xn = weighted_ls(a, b, w);
      ++iters;
      const double c = norm1(residual(a, xn, b));
      if (c < best_cost) {
        best_cost = c;
        best = xn;
      }
      double dx = 0, nx = 0;
      for (std::size_t j = 0; j < d; ++j) {
        dx = std::max(dx, std::abs(xn[j] - x[j]));
        nx = std::max(nx, std::abs(xn[j]));
      }
      x = std::move(xn);
      if (dx <= 1e-12 * (nx + 1e-300)) break;
    }
    if (mu <= tol * best_cost / double(n) || mu < 1e-300) break;
    mu /= 10.0;
  }
  sol.converged = iters < cap;
  vertex_descent(a, b, best, best_cost);
  sol.x = std::move(best);
  sol.cost = best_cost;
  sol.iterations = iters;
  return sol;
}

L1Solution solve_l1_vertex_enum(const DenseMatrix& a, std::span<const double> b) {
  const std::size_t n = a.rows(), d = a.cols();
  require(n >= d && d >= 1, ErrorCode::InvalidArgument, "vertex enumeration needs n >= d >= 1");
  L1Solution best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  DenseMatrix ai(d, d);
  Vector bi(d);
  for (;;) {
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t j = 0; j < d; ++j) ai(k, j) = a(idx[k], j);
      bi[k] = b[idx[k]];
    }
    if (auto x = solve_square(ai, bi)) {
      const double c = norm1(residual(a, *x, b));
      if (c < best.cost) {
        best.cost = c;
        best.x = *x;
      }
    }
    std::size_t k = d;
    while (k > 0 && idx[k - 1] == n - d + (k - 1)) --k;
    if (k == 0) break;
    ++idx[k - 1];
    for (std::size_t j = k; j < d; ++j) idx[j] = idx[j - 1] + 1;
  }
  require(std::isfinite(best.cost), ErrorCode::RankDeficient, "vertex enumeration found no invertible subset");
  return best;
}

std::size_t l1_embedding_rows(L1Embedding kind, std::size_t d) {
  const double dd = double(d);
  double r;
  if (kind == L1Embedding::Cauchy)
    r = constants::kCauchyRows * dd * std::log(std::max(dd, 2.0));
  else
    r = constants::kExpRows * dd * std::pow(std::log(dd + 1.0), 2.0);
  return std::max<std::size_t>(static_cast<std::size_t>(std::ceil(r)), d + 1);
}

double certify_beta(const DenseMatrix& u) {
  const std::size_t d = u.cols();
  double beta = 0;
  for (std::size_t i = 0; i < d; ++i) {
    double opt;
    if (d == 1) {
      opt = norm1(u.col(0));
    } else {
      std::vector<std::size_t> rest;
      for (std::size_t j = 0; j < d; ++j)
        if (j != i) rest.push_back(j);
      Vector rhs = u.col(i);
      for (double& v : rhs) v = -v;
      opt = solve_l1_small(u.select_cols(rest), rhs, 1e-4).cost;
    }
    require(opt > 0, ErrorCode::RankDeficient, "certify_beta: basis is rank-deficient");
    beta = std::max(beta, 1.0 / opt);
  }
  return beta;
}

WellConditionedBasis wcb_from_operator(const DenseMatrix& a, const SketchOperator& s) {
  require(a.max_abs() > 0, ErrorCode::InvalidArgument, "wcb: A is zero");
  DenseMatrix sa = apply_sketch(s, a);
  require(sa.rows() >= a.cols(), ErrorCode::InvalidArgument, "wcb: sketch has fewer rows than A has columns");
  QrResult f = qr(sa);
  require(!f.rank_deficient, ErrorCode::RankDeficient, "wcb: sketched matrix is rank-deficient");
  WellConditionedBasis w;
  w.sketch_rows = s.r;
  w.rinv = upper_triangular_inverse(f.R);
  const double beta_raw = certify_beta(matmul(a, w.rinv));
  // rescale so the certified β is exactly 1
  w.rinv *= beta_raw * (1.0 + 1e-9);
  w.beta = 1.0;
  w.alpha = 0;
  DenseMatrix u = matmul(a, w.rinv);
  for (double v : u.data()) w.alpha += std::abs(v);
  return w;
}

WellConditionedBasis wcb_from_sketch(const DenseMatrix& a, L1Embedding kind, std::uint64_t seed) {
  const std::size_t n = a.rows(), d = a.cols();
  const std::size_t r = l1_embedding_rows(kind, d);
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::uint64_t sd = derive_seed(seed, attempt);
    try {
      if (kind == L1Embedding::Cauchy) return wcb_from_operator(a, make_sketch(SketchKind::Cauchy, r, n, sd));
      SketchOperator e = make_sketch(SketchKind::ExpReciprocalDiag, n, n, sd);
      SketchOperator c = make_sketch(SketchKind::SparseEmbedding, r, n, derive_seed(sd, 7));
      DenseMatrix ea = apply_sketch(e, a);
      // S∘D applied as one step: QR of S·(D·A), basis still A·R⁻¹
      DenseMatrix sea = apply_sketch(c, ea);
      QrResult f = qr(sea);
      if (f.rank_deficient) continue;
      WellConditionedBasis w;
      w.sketch_rows = r;
      w.rinv = upper_triangular_inverse(f.R);
      const double beta_raw = certify_beta(matmul(a, w.rinv));
      w.rinv *= beta_raw * (1.0 + 1e-9);
      DenseMatrix u = matmul(a, w.rinv);
      for (double v : u.data()) w.alpha += std::abs(v);
      return w;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::RankDeficient) throw;
    }
  }
  fail(ErrorCode::RankDeficient, "wcb: sketched matrix rank-deficient after reseed");
}

double wcb_alpha_bound(std::size_t d, std::size_t rows) {
  if (d < 2) return std::numeric_limits<double>::infinity();
  const double c2 = std::log(double(rows)) / std::log(double(d));
  return std::pow(double(d), constants::kCauchyDilationExp + c2 / 2.0 + 1.0);
}

Vector l1_sampling_probs(const DenseMatrix& a, const WellConditionedBasis& basis, std::uint64_t seed, double width_c) {
  if (width_c <= 0) width_c = constants::kL1Width;
  const std::size_t n = a.rows(), d = a.cols();
  const std::size_t t =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(width_c * std::log(double(std::max<std::size_t>(n, 2))))));
  DenseMatrix g(d, t);
  Rng rng(seed, 41);
  const double sc = 1.0 / std::sqrt(double(t));
  for (double& v : g.data()) v = sc * rng.normal();
  DenseMatrix arg = matmul(a, matmul(basis.rinv, g));
  Vector q(n);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) total += (q[i] = norm1(arg.row(i)));
  require(total > 0, ErrorCode::RankDeficient, "l1_sampling_probs: all row estimates are zero");
  for (double& v : q) v /= total;
  return q;
}

std::size_t l1_sample_budget(std::size_t d_aug, double eps, double c) {
  if (c <= 0) c = constants::kL1Rows;
  const double d = double(d_aug);
  const double zeta = 1.0 / (4.0 * d);
  return static_cast<std::size_t>(std::ceil(c * std::pow(d, 2.5) / (zeta * eps * eps)));
}

namespace {

struct SampledRows {
  std::vector<std::size_t> rows;
  Vector weights;
};

SampledRows bernoulli_rows(std::span<const double> q, std::size_t budget, std::uint64_t seed) {
  SampledRows s;
  Rng rng(seed, 51);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double p = std::min(1.0, double(budget) * q[i]);
    const double u = rng.uniform();
    if (p > 0 && u < p) {
      s.rows.push_back(i);
      s.weights.push_back(1.0 / p);
    }
  }
  return s;
}

DenseMatrix weighted_rows(const DenseMatrix& a, const SampledRows& s) {
  DenseMatrix out = a.select_rows(s.rows);
  for (std::size_t k = 0; k < s.rows.size(); ++k) {
    double* r = out.row_ptr(k);
    for (std::size_t j = 0; j < out.cols(); ++j) r[j] *= s.weights[k];
  }
  return out;
}

}  // namespace

L1Solution solve_l1_sketched(const DenseMatrix& a, std::span<const double> b, double eps, L1Embedding kind,
                             std::uint64_t seed) {
  require(a.rows() == b.size(), ErrorCode::DimensionMismatch, "solve_l1_sketched: b length mismatch");
  require(eps > 0 && eps < 1, ErrorCode::InvalidArgument, "solve_l1_sketched: eps must be in (0,1)");
  const std::size_t d = a.cols();
  const DenseMatrix m = hcat(a, DenseMatrix::column(b));
  const std::size_t budget = l1_sample_budget(d + 1, eps);
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::uint64_t sd = derive_seed(seed, 1000 + attempt);
    WellConditionedBasis basis;
    try {
      basis = wcb_from_sketch(m, kind, sd);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient) throw;
      // [A b] lies in a proper subspace: b may be in colspace(A)
      DenseMatrix mm = a;
      Vector x = solve_l2_exact(mm, b);
      L1Solution sol = solve_l1_small(a.rows() <= 10000 ? a : a.rows_range(0, 10000),
                                      a.rows() <= 10000 ? Vector(b.begin(), b.end()) : Vector(b.begin(), b.begin() + 10000));
      if (l1_cost(a, x, b) <= l1_cost(a, sol.x, b)) sol.x = x;
      sol.cost = l1_cost(a, sol.x, b);
      return sol;
    }
    Vector q = l1_sampling_probs(m, basis, derive_seed(sd, 1));
    SampledRows s = bernoulli_rows(q, budget, derive_seed(sd, 2));
    if (s.rows.size() < d + 1) continue;
    DenseMatrix sm = weighted_rows(m, s);
    DenseMatrix sa = sm.cols_range(0, d);
    if (qr(sa).rank_deficient) continue;
    Vector sbv = sm.col(d);
    L1Solution sol = solve_l1_small(sa, sbv);
    sol.sampled_rows = s.rows.size();
    sol.cost = l1_cost(a, sol.x, b);
    return sol;
  }
  fail(ErrorCode::RankDeficient, "solve_l1_sketched: sampled problem degenerate after reseed");
}

namespace {

DenseMatrix lift(const DenseMatrix& p, bool affine) {
  if (!affine) return p;
  return hcat(p, DenseMatrix::column(Vector(p.rows(), 1.0)));
}

HyperplaneFit fit_on(const DenseMatrix& full, const DenseMatrix& sampled, std::size_t coords) {
  HyperplaneFit best;
  best.sketched_cost = std::numeric_limits<double>::infinity();
  const std::size_t dd = full.cols();
  for (std::size_t j = 0; j < coords; ++j) {
    std::vector<std::size_t> rest;
    for (std::size_t c = 0; c < dd; ++c)
      if (c != j) rest.push_back(c);
    Vector rhs = sampled.col(j);
    for (double& v : rhs) v = -v;
    L1Solution sol = solve_l1_small(sampled.select_cols(rest), rhs);
    if (sol.cost < best.sketched_cost) {
      best.sketched_cost = sol.cost;
      best.j = j;
      best.w.assign(dd, 0.0);
      best.w[j] = 1.0;
      for (std::size_t k = 0; k < rest.size(); ++k) best.w[rest[k]] = sol.x[k];
    }
  }
  best.cost = norm1(matvec(full, best.w));
  return best;
}

// Points confined to a hyperplane: read the normal off the null space.
HyperplaneFit exact_fit(const DenseMatrix& full, std::size_t coords) {
  SvdResult f = svd(full);
  require(f.rank < full.cols(), ErrorCode::RankDeficient, "hyperplane fit: degenerate point set");
  // null vector: orthogonal complement of the right singular vectors
  DenseMatrix basis = DenseMatrix::identity(full.cols());
  Vector w;
  for (std::size_t e = 0; e < full.cols() && w.empty(); ++e) {
    Vector v = basis.col(e);
    for (std::size_t k = 0; k < f.rank; ++k) {
      const double c = dot(v, f.Vt.row(k));
      for (std::size_t j = 0; j < v.size(); ++j) v[j] -= c * f.Vt(k, j);
    }
    if (norm2(v) > 1e-6) w = v;
  }
  std::size_t j = 0;
  for (std::size_t c = 1; c < coords; ++c)
    if (std::abs(w[c]) > std::abs(w[j])) j = c;
  require(std::abs(w[j]) > 0, ErrorCode::RankDeficient, "hyperplane fit: null vector has no usable coordinate");
  const double s = w[j];
  for (double& v : w) v /= s;
  HyperplaneFit h;
  h.j = j;
  h.w = w;
  h.cost = norm1(matvec(full, w));
  h.sketched_cost = h.cost;
  return h;
}

}  // namespace

HyperplaneFit l1_hyperplane_fit(const DenseMatrix& points, double eps, std::uint64_t seed, bool affine,
                                L1Embedding kind) {
  require(points.cols() >= 2 && points.rows() > points.cols(), ErrorCode::InvalidArgument,
          "hyperplane fit needs n > d >= 2");
  const DenseMatrix full = lift(points, affine);
  const std::size_t budget = l1_sample_budget(full.cols(), eps);
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::uint64_t sd = derive_seed(seed, 2000 + attempt);
    WellConditionedBasis basis;
    try {
      basis = wcb_from_sketch(full, kind, sd);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient) throw;
      return exact_fit(full, points.cols());
    }
    Vector q = l1_sampling_probs(full, basis, derive_seed(sd, 1));
    SampledRows s = bernoulli_rows(q, budget, derive_seed(sd, 2));
    if (s.rows.size() < full.cols()) continue;
    return fit_on(full, weighted_rows(full, s), points.cols());
  }
  fail(ErrorCode::RankDeficient, "hyperplane fit: sampled problem degenerate after reseed");
}

HyperplaneFit l1_hyperplane_exact(const DenseMatrix& points, bool affine) {
  const DenseMatrix full = lift(points, affine);
  if (numerical_rank(full) < full.cols()) return exact_fit(full, points.cols());
  return fit_on(full, full, points.cols());
}

}  // namespace snla
