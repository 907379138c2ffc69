#include "snla/leverage.hpp"

#include <algorithm>
#include <cmath>

#include "snla/constants.hpp"
#include "snla/linalg.hpp"
#include "snla/rng.hpp"
#include "snla/sketch.hpp"

namespace snla {

Vector leverage_exact(const DenseMatrix& a) {
  SvdResult f = svd(a);
  Vector l(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ui = f.U.row_ptr(i);
    double s = 0;
    for (std::size_t j = 0; j < f.rank; ++j) s += ui[j] * ui[j];
    l[i] = s;
  }
  return l;
}

double gamma_for_beta(double beta) {
  require(beta > 0 && beta < 1, ErrorCode::InvalidArgument, "beta must be in (0,1)");
  double g = 0.5;
  while ((1 - g) * (1 - 2 * g) < beta) g /= 2;
  return g;
}

Vector leverage_approx(const DenseMatrix& a, double beta_target, std::uint64_t seed, double width_c) {
  if (width_c <= 0) width_c = constants::kLeverageWidth;
  const double gamma = gamma_for_beta(beta_target);
  const std::size_t n = a.rows(), k = a.cols();
  const std::size_t r = static_cast<std::size_t>(std::ceil(double(k) * double(k) / (gamma * gamma)));
  const std::size_t t = static_cast<std::size_t>(
      std::ceil(width_c * std::log(double(std::max<std::size_t>(n, 2))) / (gamma * gamma)));
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::uint64_t sd = derive_seed(seed, attempt);
    SketchOperator s = sparse_or_identity(std::max(r, k), n, sd);
    DenseMatrix sa = apply_sketch(s, a);
    QrResult f = qr(sa);
    if (f.rank_deficient) continue;
    DenseMatrix g(k, t);
    Rng rng(sd, 11);
    const double scale = 1.0 / std::sqrt(double(t));
    for (double& v : g.data()) v = scale * rng.normal();
    DenseMatrix rg = matmul(upper_triangular_inverse(f.R), g);
    DenseMatrix arg = matmul(a, rg);
    Vector q(n);
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      q[i] = dot(arg.row(i), arg.row(i));
      total += q[i];
    }
    require(total > 0, ErrorCode::RankDeficient, "leverage_approx: zero estimate");
    for (double& v : q) v /= total;
    return q;
  }
  fail(ErrorCode::RankDeficient, "leverage_approx: sketched matrix rank-deficient after reseed");
}

SamplingPlan rand_sampling(std::span<const double> q, std::size_t s, std::uint64_t seed) {
  require(s >= 1, ErrorCode::InvalidArgument, "rand_sampling: s must be positive");
  double total = 0;
  for (double v : q) {
    require(v >= 0 && std::isfinite(v), ErrorCode::InvalidArgument, "rand_sampling: negative probability");
    total += v;
  }
  require(total > 0, ErrorCode::InvalidArgument, "rand_sampling: all probabilities are zero");
  require(std::abs(total - 1.0) <= 1e-9, ErrorCode::InvalidArgument, "rand_sampling: q does not sum to 1");
  SamplingPlan p;
  p.s = s;
  p.q.assign(q.begin(), q.end());
  Vector prefix(q.size());
  double acc = 0;
  for (std::size_t i = 0; i < q.size(); ++i) prefix[i] = (acc += q[i]);
  Rng rng(seed, 21);
  p.indices.resize(s);
  p.scales.resize(s);
  for (std::size_t j = 0; j < s; ++j) {
    const double u = rng.uniform() * acc;
    std::size_t i = std::upper_bound(prefix.begin(), prefix.end(), u) - prefix.begin();
    if (i >= q.size()) i = q.size() - 1;
    while (q[i] == 0.0 && i > 0) --i;
    p.indices[j] = i;
    p.scales[j] = 1.0 / std::sqrt(q[i] * double(s));
  }
  return p;
}

DenseMatrix apply_plan(const SamplingPlan& plan, const DenseMatrix& a) {
  DenseMatrix out = a.select_rows(plan.indices);
  for (std::size_t j = 0; j < plan.s; ++j) {
    double* r = out.row_ptr(j);
    for (std::size_t c = 0; c < out.cols(); ++c) r[c] *= plan.scales[j];
  }
  return out;
}

std::size_t leverage_sample_count(std::size_t k, double beta, double eps, double delta) {
  return static_cast<std::size_t>(std::ceil(144.0 * double(k) * std::log(2.0 * double(k) / delta) / (beta * eps * eps)));
}

}  // namespace snla
