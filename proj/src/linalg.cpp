#include "snla/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace snla {

namespace {

constexpr int kMaxSweeps = 60;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Column-major scratch so Jacobi rotations stream through contiguous memory.
struct Columns {
  std::size_t m = 0, n = 0;
  std::vector<double> v;
  Columns(std::size_t m_, std::size_t n_) : m(m_), n(n_), v(m_ * n_, 0.0) {}
  double* col(std::size_t j) { return v.data() + j * m; }
  const double* col(std::size_t j) const { return v.data() + j * m; }
};

Columns to_columns(const DenseMatrix& a) {
  Columns c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c.col(j)[i] = a(i, j);
  return c;
}

double col_dot(const double* x, const double* y, std::size_t m) {
  double s = 0;
  for (std::size_t i = 0; i < m; ++i) s += x[i] * y[i];
  return s;
}

// On return the columns of w are mutually orthogonal and v holds the rotations.
void one_sided_jacobi(Columns& w, Columns& v) {
  const std::size_t n = w.n, m = w.m;
  const double tol = kEps * std::max<std::size_t>(n, 4);
  std::vector<double> norms(n);
  double fro_sq = 0;
  for (std::size_t j = 0; j < n; ++j) fro_sq += (norms[j] = col_dot(w.col(j), w.col(j), m));
  // columns at roundoff level relative to ‖A‖ are left alone; rotating them never settles
  const double negligible = double(n) * double(n) * kEps * kEps * fro_sq;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = norms[p], beta = norms[q];
        if (alpha <= negligible || beta <= negligible) continue;
        double* ap = w.col(p);
        double* aq = w.col(q);
        const double gamma = col_dot(ap, aq, m);
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = ap[i], y = aq[i];
          ap[i] = c * x - s * y;
          aq[i] = s * x + c * y;
        }
        double* vp = v.col(p);
        double* vq = v.col(q);
        for (std::size_t i = 0; i < v.m; ++i) {
          const double x = vp[i], y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
        norms[p] = col_dot(ap, ap, m);
        norms[q] = col_dot(aq, aq, m);
      }
    }
    if (!rotated) return;
  }
  fail(ErrorCode::NotConverged, "svd did not converge in " + std::to_string(kMaxSweeps) + " sweeps on a " +
                                    std::to_string(m) + "x" + std::to_string(n) + " matrix");
}

// Thin SVD of a tall (m ≥ n) matrix, no truncation: U m×n, sigma n, V n×n.
void svd_tall(const DenseMatrix& a, DenseMatrix& u, Vector& sigma, DenseMatrix& v) {
  const std::size_t m = a.rows(), n = a.cols();
  DenseMatrix q;
  DenseMatrix base = a;
  const bool precondition = m > n;
  if (precondition) {
    QrResult f = qr(a);
    q = std::move(f.Q);
    base = std::move(f.R);
  }
  Columns w = to_columns(base);
  Columns vv(n, n);
  for (std::size_t j = 0; j < n; ++j) vv.col(j)[j] = 1.0;
  one_sided_jacobi(w, vv);

  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = std::sqrt(col_dot(w.col(j), w.col(j), w.m));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return s[x] > s[y]; });

  DenseMatrix ub(base.rows(), n);
  sigma.assign(n, 0.0);
  v = DenseMatrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t j = order[c];
    sigma[c] = s[j];
    const double inv = s[j] > 0 ? 1.0 / s[j] : 0.0;
    for (std::size_t i = 0; i < base.rows(); ++i) ub(i, c) = w.col(j)[i] * inv;
    for (std::size_t i = 0; i < n; ++i) v(i, c) = vv.col(j)[i];
  }
  u = precondition ? matmul(q, ub) : std::move(ub);
}

}  // namespace

double default_rank_tol(std::size_t rows, std::size_t cols) { return 1e-10 * static_cast<double>(std::max(rows, cols)); }

SvdResult svd(const DenseMatrix& a, double rank_tol) {
  require(a.all_finite(), ErrorCode::InvalidArgument, "svd input is not finite");
  if (rank_tol < 0) rank_tol = default_rank_tol(a.rows(), a.cols());
  SvdResult out;
  if (a.rows() == 0 || a.cols() == 0) return out;
  const bool wide = a.rows() < a.cols();
  DenseMatrix u, v;
  Vector s;
  svd_tall(wide ? a.transpose() : a, u, s, v);
  if (wide) std::swap(u, v);
  const double cut = s.empty() ? 0.0 : rank_tol * s[0];
  std::size_t rho = 0;
  while (rho < s.size() && s[rho] > cut && s[rho] > 0.0) ++rho;
  out.rank = rho;
  out.sigma.assign(s.begin(), s.begin() + rho);
  out.U = u.cols_range(0, rho);
  out.Vt = v.cols_range(0, rho).transpose();
  return out;
}

Vector singular_values(const DenseMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return {};
  const bool wide = a.rows() < a.cols();
  DenseMatrix u, v;
  Vector s;
  svd_tall(wide ? a.transpose() : a, u, s, v);
  return s;
}

DenseMatrix pinv(const DenseMatrix& a, double rank_tol) {
  SvdResult f = svd(a, rank_tol);
  DenseMatrix vs = f.Vt.transpose();
  for (std::size_t i = 0; i < vs.rows(); ++i)
    for (std::size_t j = 0; j < f.rank; ++j) vs(i, j) /= f.sigma[j];
  if (f.rank == 0) return DenseMatrix(a.cols(), a.rows());
  return matmul_nt(vs, f.U);
}

QrResult qr(const DenseMatrix& a) {
  const std::size_t m = a.rows(), n = a.cols();
  require(m >= n, ErrorCode::InvalidArgument,
          "qr needs rows >= cols, got " + std::to_string(m) + "x" + std::to_string(n));
  DenseMatrix r = a;
  std::vector<Vector> reflectors(n);
  Vector w(n);
  for (std::size_t j = 0; j < n; ++j) {
    double nx = 0;
    for (std::size_t i = j; i < m; ++i) nx += r(i, j) * r(i, j);
    nx = std::sqrt(nx);
    Vector vj(m - j, 0.0);
    if (nx == 0.0) {
      reflectors[j] = std::move(vj);
      continue;
    }
    const double alpha = r(j, j) > 0 ? -nx : nx;
    for (std::size_t i = j; i < m; ++i) vj[i - j] = r(i, j);
    vj[0] -= alpha;
    const double vn = norm2(vj);
    if (vn == 0.0) {
      reflectors[j] = Vector(m - j, 0.0);
      continue;
    }
    for (double& x : vj) x /= vn;
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = j; i < m; ++i) {
      const double vi = vj[i - j];
      if (vi == 0.0) continue;
      const double* ri = r.row_ptr(i);
      for (std::size_t c = j; c < n; ++c) w[c] += vi * ri[c];
    }
    for (std::size_t i = j; i < m; ++i) {
      const double vi = 2.0 * vj[i - j];
      if (vi == 0.0) continue;
      double* ri = r.row_ptr(i);
      for (std::size_t c = j; c < n; ++c) ri[c] -= vi * w[c];
    }
    r(j, j) = alpha;
    for (std::size_t i = j + 1; i < m; ++i) r(i, j) = 0.0;
    reflectors[j] = std::move(vj);
  }
  DenseMatrix q(m, n);
  for (std::size_t j = 0; j < n; ++j) q(j, j) = 1.0;
  for (std::size_t jj = n; jj-- > 0;) {
    const Vector& vj = reflectors[jj];
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = jj; i < m; ++i) {
      const double vi = vj[i - jj];
      if (vi == 0.0) continue;
      const double* qi = q.row_ptr(i);
      for (std::size_t c = jj; c < n; ++c) w[c] += vi * qi[c];
    }
    for (std::size_t i = jj; i < m; ++i) {
      const double vi = 2.0 * vj[i - jj];
      if (vi == 0.0) continue;
      double* qi = q.row_ptr(i);
      for (std::size_t c = jj; c < n; ++c) qi[c] -= vi * w[c];
    }
  }
  QrResult out;
  out.R = r.rows_range(0, n);
  out.Q = std::move(q);
  for (std::size_t j = 0; j < n; ++j) {
    if (out.R(j, j) >= 0) continue;
    for (std::size_t c = j; c < n; ++c) out.R(j, c) = -out.R(j, c);
    for (std::size_t i = 0; i < m; ++i) out.Q(i, j) = -out.Q(i, j);
  }
  double dmax = 0;
  for (std::size_t j = 0; j < n; ++j) dmax = std::max(dmax, std::abs(out.R(j, j)));
  const double cut = default_rank_tol(m, n) * dmax;
  for (std::size_t j = 0; j < n; ++j)
    if (std::abs(out.R(j, j)) <= cut) out.rank_deficient = true;
  return out;
}

EigResult sym_eig(const DenseMatrix& input) {
  const std::size_t n = input.rows();
  require(n == input.cols(), ErrorCode::DimensionMismatch, "sym_eig needs a square matrix");
  DenseMatrix a = input;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
  DenseMatrix v = DenseMatrix::identity(n);
  const double scale = a.frobenius();
  bool converged = n <= 1 || scale == 0.0;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    double off = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(off) <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    double off = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    require(std::sqrt(off) <= 1e-13 * scale, ErrorCode::NotConverged,
            "sym_eig did not converge on a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  EigResult out;
  out.values.resize(n);
  out.vectors = DenseMatrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, c) = v(i, order[c]);
  }
  return out;
}

std::size_t numerical_rank(const DenseMatrix& a, double rank_tol) {
  if (rank_tol < 0) rank_tol = default_rank_tol(a.rows(), a.cols());
  Vector s = singular_values(a);
  if (s.empty() || s[0] == 0.0) return 0;
  std::size_t r = 0;
  while (r < s.size() && s[r] > rank_tol * s[0]) ++r;
  return r;
}

double spectral_norm(const DenseMatrix& a) {
  Vector s = singular_values(a);
  return s.empty() ? 0.0 : s[0];
}

DenseMatrix orth(const DenseMatrix& a, double rank_tol) { return svd(a, rank_tol).U; }

DenseMatrix upper_triangular_inverse(const DenseMatrix& r) {
  const std::size_t n = r.rows();
  require(n == r.cols(), ErrorCode::DimensionMismatch, "triangular inverse needs a square matrix");
  DenseMatrix inv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t ii = j + 1; ii-- > 0;) {
      double s = ii == j ? 1.0 : 0.0;
      for (std::size_t k = ii + 1; k <= j; ++k) s -= r(ii, k) * inv(k, j);
      require(r(ii, ii) != 0.0, ErrorCode::RankDeficient, "triangular factor is singular");
      inv(ii, j) = s / r(ii, ii);
    }
  }
  return inv;
}

std::optional<Vector> solve_square(const DenseMatrix& a_in, std::span<const double> b_in) {
  const std::size_t n = a_in.rows();
  require(n == a_in.cols() && b_in.size() == n, ErrorCode::DimensionMismatch, "solve_square dimension mismatch");
  DenseMatrix a = a_in;
  Vector b(b_in.begin(), b_in.end());
  const double scale = std::max(a.max_abs(), std::numeric_limits<double>::min());
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < n; ++i)
      if (std::abs(a(i, c)) > std::abs(a(piv, c))) piv = i;
    if (std::abs(a(piv, c)) <= 1e-14 * scale) return std::nullopt;
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(piv, j));
      std::swap(b[c], b[piv]);
    }
    for (std::size_t i = c + 1; i < n; ++i) {
      const double f = a(i, c) / a(c, c);
      if (f == 0.0) continue;
      for (std::size_t j = c; j < n; ++j) a(i, j) -= f * a(c, j);
      b[i] -= f * b[c];
    }
  }
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
    x[ii] = s / a(ii, ii);
  }
  return x;
}

double tail_norm(const DenseMatrix& a, std::size_t k, bool spectral) {
  Vector s = singular_values(a);
  if (spectral) return k < s.size() ? s[k] : 0.0;
  double t = 0;
  for (std::size_t i = k; i < s.size(); ++i) t += s[i] * s[i];
  return std::sqrt(t);
}

RowAccumulator::RowAccumulator(std::size_t cols) : n_(cols), r_(cols, cols) {}

void RowAccumulator::add_row(std::span<const double> row) {
  Vector x(row.begin(), row.end());
  for (double v : x) fro_sq_ += v * v;
  for (std::size_t j = 0; j < n_; ++j) {
    if (x[j] == 0.0) continue;
    const double rjj = r_(j, j);
    const double h = std::hypot(rjj, x[j]);
    const double c = rjj / h, s = x[j] / h;
    r_(j, j) = h;
    double* rj = r_.row_ptr(j);
    for (std::size_t l = j + 1; l < n_; ++l) {
      const double t1 = rj[l], t2 = x[l];
      rj[l] = c * t1 + s * t2;
      x[l] = -s * t1 + c * t2;
    }
  }
}

double RowAccumulator::spectral_norm() const { return snla::spectral_norm(r_); }

}  // namespace snla
