#include "snla/analysis.hpp"

#include <cmath>

#include "snla/constants.hpp"
#include "snla/linalg.hpp"
#include "snla/rng.hpp"

namespace snla {

std::size_t schatten_probes(double eps) {
  return static_cast<std::size_t>(std::ceil(constants::kSchattenProbes / (eps * eps)));
}

namespace {

// B·(x; y) = (Aᵀy; Ax), one pass over A
Vector apply_sym(const DenseMatrix& a, std::span<const double> g) {
  const std::size_t n = a.rows(), d = a.cols();
  Vector out(n + d);
  Vector top = matvec_t(a, g.subspan(d, n));
  Vector bot = matvec(a, g.subspan(0, d));
  std::copy(top.begin(), top.end(), out.begin());
  std::copy(bot.begin(), bot.end(), out.begin() + d);
  return out;
}

// |B|^s g from A = UΣVᵀ: (VΣˢVᵀx; UΣˢUᵀy)
Vector apply_abs_power(const DenseMatrix& a, const SvdResult& f, int s, std::span<const double> g) {
  const std::size_t n = a.rows(), d = a.cols();
  Vector cx = matvec(f.Vt, g.subspan(0, d));
  Vector cy = matvec_t(f.U, g.subspan(d, n));
  for (std::size_t i = 0; i < f.rank; ++i) {
    const double sp = std::pow(f.sigma[i], s);
    cx[i] *= sp;
    cy[i] *= sp;
  }
  Vector out(n + d);
  Vector x = matvec_t(f.Vt, cx);
  Vector y = matvec(f.U, cy);
  std::copy(x.begin(), x.end(), out.begin());
  std::copy(y.begin(), y.end(), out.begin() + d);
  return out;
}

double probe(const DenseMatrix& a, int p, std::span<const double> g, const SvdResult* f) {
  if (p % 2 == 0) {
    Vector h(g.begin(), g.end());
    for (int i = 0; i < p / 2; ++i) h = apply_sym(a, h);
    return dot(h, h) / 2.0;
  }
  const int s = (p + 1) / 2, t = p / 2;
  Vector hs = apply_abs_power(a, *f, s, g);
  Vector ht = t > 0 ? apply_abs_power(a, *f, t, g) : Vector(g.begin(), g.end());
  return dot(hs, ht) / 2.0;
}

}  // namespace

double schatten_probe(const DenseMatrix& a, int p, std::span<const double> g) {
  require(p >= 1, ErrorCode::InvalidArgument, "schatten: p must be at least 1");
  require(g.size() == a.rows() + a.cols(), ErrorCode::DimensionMismatch, "schatten: probe length must be n + d");
  if (p % 2 == 0) return probe(a, p, g, nullptr);
  SvdResult f = svd(a);
  return probe(a, p, g, &f);
}

SchattenEstimate schatten_estimate(const DenseMatrix& a, int p, double eps, std::uint64_t seed) {
  require(p >= 1, ErrorCode::InvalidArgument, "schatten: p must be at least 1");
  require(eps > 0 && eps < 1, ErrorCode::InvalidArgument, "schatten: eps must be in (0,1)");
  SchattenEstimate out;
  out.p = p;
  out.trials = schatten_probes(eps);
  out.passes = static_cast<std::size_t>((p + 1) / 2);
  SvdResult f;
  if (p % 2 == 1) f = svd(a);
  Rng rng(seed, 81);
  Vector g(a.rows() + a.cols());
  double sum = 0;
  for (std::size_t i = 0; i < out.trials; ++i) {
    for (double& x : g) x = rng.normal();
    sum += probe(a, p, g, &f);
  }
  out.estimate = sum / double(out.trials);
  return out;
}

double schatten_exact(const DenseMatrix& a, int p) {
  require(p >= 1, ErrorCode::InvalidArgument, "schatten: p must be at least 1");
  double s = 0;
  for (double x : singular_values(a)) s += std::pow(x, p);
  return s;
}

std::size_t jl_attack_queries(std::size_t k) { return (k + 1) * k / 2 + (k + 1) + 1; }

AttackResult jl_attack(const NormOracle& oracle, std::size_t k, std::size_t n) {
  require(k >= 1 && n > k, ErrorCode::InvalidArgument, "jl_attack: need n > k >= 1");
  const std::size_t m = k + 1;
  AttackResult out;
  Vector x(n, 0.0);
  auto ask = [&](const Vector& q) {
    ++out.queries;
    return oracle(q);
  };
  DenseMatrix gram(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = 1.0;
    gram(i, i) = ask(x);
    x[i] = 0.0;
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      x[i] = x[j] = 1.0;
      const double both = ask(x);
      x[i] = x[j] = 0.0;
      gram(i, j) = gram(j, i) = (both - gram(i, i) - gram(j, j)) / 2.0;
    }
  EigResult e = sym_eig(gram);
  out.gram_lambda_min = e.values.front();
  out.gram_lambda_max = e.values.back();
  if (e.values.front() > 1e-10 * std::abs(e.values.back()) * double(m))
    fail(ErrorCode::Inapplicable, "attack inapplicable: the sketch appears to have more than k rows");
  out.v.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) out.v[i] = e.vectors(i, 0);
  out.final_answer = ask(out.v);
  return out;
}

}  // namespace snla
