#include <cmath>

#include "snla/constants.hpp"
#include "snla/linalg.hpp"
#include "snla/regress.hpp"
#include "snla/rng.hpp"

namespace snla {

namespace {

Vector residual(const DenseMatrix& a, std::span<const double> x, std::span<const double> b) {
  require(a.cols() == x.size() && a.rows() == b.size(), ErrorCode::DimensionMismatch, "cost: dimension mismatch");
  Vector r = matvec(a, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

void check_problem(const DenseMatrix& a, std::span<const double> b) {
  require(a.rows() == b.size(), ErrorCode::DimensionMismatch,
          "regression: b has " + std::to_string(b.size()) + " entries, A has " + std::to_string(a.rows()) + " rows");
  require(a.rows() >= a.cols() && a.cols() >= 1, ErrorCode::InvalidArgument, "regression needs n >= d >= 1");
}

struct Sketched {
  DenseMatrix sa;
  Vector sb;
};

Sketched sketch_system(const DenseMatrix& a, std::span<const double> b, const SketchOperator& s) {
  DenseMatrix sab = apply_sketch(s, hcat(a, DenseMatrix::column(b)));
  Sketched out{sab.cols_range(0, a.cols()), sab.col(a.cols())};
  return out;
}

}  // namespace

double l2_cost(const DenseMatrix& a, std::span<const double> x, std::span<const double> b) {
  return norm2(residual(a, x, b));
}

double l1_cost(const DenseMatrix& a, std::span<const double> x, std::span<const double> b) {
  return norm1(residual(a, x, b));
}

Vector solve_l2_exact(const DenseMatrix& a, std::span<const double> b) {
  require(a.rows() == b.size(), ErrorCode::DimensionMismatch, "solve_l2_exact: b length mismatch");
  return matvec(pinv(a), b);
}

std::size_t sketch_solve_rows(std::size_t d, double eps) {
  return static_cast<std::size_t>(std::ceil(constants::kSketchSolveRows * double(d) * double(d) / eps));
}

Vector sketch_solve_l2_constrained(const DenseMatrix& a, std::span<const double> b, const SmallL2Solver& solver,
                                   double eps, std::uint64_t seed) {
  check_problem(a, b);
  require(eps > 0 && eps < 1, ErrorCode::InvalidArgument, "sketch_solve_l2: eps must be in (0,1)");
  const std::size_t r = std::max(sketch_solve_rows(a.cols(), eps), a.cols());
  for (int attempt = 0; attempt < 2; ++attempt) {
    SketchOperator s = sparse_or_identity(r, a.rows(), derive_seed(seed, attempt));
    Sketched sk = sketch_system(a, b, s);
    if (qr(sk.sa).rank_deficient) continue;
    return solver(sk.sa, sk.sb);
  }
  fail(ErrorCode::RankDeficient, "sketch_solve_l2: sketched matrix rank-deficient after reseed");
}

Vector sketch_solve_l2(const DenseMatrix& a, std::span<const double> b, double eps, std::uint64_t seed) {
  return sketch_solve_l2_constrained(
      a, b, [](const DenseMatrix& sa, std::span<const double> sb) { return solve_l2_exact(sa, sb); }, eps, seed);
}

std::size_t precond_iterations(double eps) {
  return static_cast<std::size_t>(std::ceil(std::log(1.0 / eps) / std::log(3.0))) + 1;
}

std::size_t precond_rows(std::size_t d, double eps0) {
  return static_cast<std::size_t>(std::ceil(double(d) * double(d) / (constants::kConstantDelta * eps0 * eps0)));
}

IterationTrace precond_solve_l2(const DenseMatrix& a, std::span<const double> b, double eps, const SketchOperator& s) {
  check_problem(a, b);
  require(eps > 0 && eps <= 0.5, ErrorCode::InvalidArgument, "precond_solve_l2: eps must be in (0, 1/2]");
  Sketched sk = sketch_system(a, b, s);
  QrResult f = qr(sk.sa);
  require(!f.rank_deficient, ErrorCode::RankDeficient, "precond_solve_l2: R is singular");
  const DenseMatrix rpre = upper_triangular_inverse(f.R);
  const DenseMatrix ar = matmul(a, rpre);
  Vector sv = singular_values(ar);
  IterationTrace tr;
  tr.sketch_rows = s.r;
  tr.kappa = sv.back() > 0 ? sv.front() / sv.back() : INFINITY;
  Vector y = matvec_t(f.Q, sk.sb);
  auto record = [&] {
    Vector x = matvec(rpre, y);
    tr.residuals.push_back(l2_cost(a, x, b));
    tr.iterates.push_back(std::move(x));
  };
  record();
  const std::size_t m = precond_iterations(eps);
  for (std::size_t it = 0; it < m; ++it) {
    Vector r = matvec(ar, y);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    Vector g = matvec_t(ar, r);
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += g[j];
    record();
  }
  tr.iterations = m;
  tr.x = tr.iterates.back();
  return tr;
}

IterationTrace precond_solve_l2(const DenseMatrix& a, std::span<const double> b, double eps, std::uint64_t seed) {
  check_problem(a, b);
  const std::size_t r = std::max(precond_rows(a.cols(), constants::kPrecondEps0), a.cols());
  for (int attempt = 0; attempt < 2; ++attempt) {
    SketchOperator s = sparse_or_identity(r, a.rows(), derive_seed(seed, attempt));
    try {
      return precond_solve_l2(a, b, eps, s);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient) throw;
    }
  }
  fail(ErrorCode::RankDeficient, "precond_solve_l2: R singular after reseed");
}

}  // namespace snla
