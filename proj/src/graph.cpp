#include "snla/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "snla/constants.hpp"
#include "snla/leverage.hpp"
#include "snla/linalg.hpp"
#include "snla/rng.hpp"

namespace snla {

WeightedGraph::WeightedGraph(std::size_t n, std::vector<Edge> edges) : n_(n) {
  require(n >= 2, ErrorCode::InvalidArgument, "graph needs at least 2 vertices");
  for (auto& e : edges) {
    require(e.u < n && e.v < n, ErrorCode::InvalidArgument,
            "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") has a vertex out of range");
    require(e.u != e.v, ErrorCode::InvalidArgument, "self-loop at vertex " + std::to_string(e.u));
    require(e.w > 0 && std::isfinite(e.w), ErrorCode::InvalidArgument, "edge weights must be positive");
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  for (std::size_t i = 1; i < edges.size(); ++i)
    require(edges[i].u != edges[i - 1].u || edges[i].v != edges[i - 1].v, ErrorCode::InvalidArgument,
            "duplicate edge (" + std::to_string(edges[i].u) + "," + std::to_string(edges[i].v) + ")");
  edges_ = std::move(edges);
}

std::size_t WeightedGraph::components() const {
  std::vector<std::size_t> parent(n_);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t c = n_;
  for (const auto& e : edges_) {
    const std::size_t a = find(e.u), b = find(e.v);
    if (a != b) {
      parent[a] = b;
      --c;
    }
  }
  return c;
}

WeightedGraph parse_edge_list(const std::string& text, std::size_t n) {
  std::istringstream in(text);
  std::string line;
  std::vector<Edge> edges;
  std::size_t lineno = 0, top = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    long long u, v;
    double w;
    if (!(ls >> u)) continue;
    if (!(ls >> v >> w) || u < 0 || v < 0)
      fail(ErrorCode::Parse, "line " + std::to_string(lineno) + ": expected `u v w` with 0-based vertices");
    std::string extra;
    if (ls >> extra) fail(ErrorCode::Parse, "line " + std::to_string(lineno) + ": trailing text");
    edges.push_back({std::size_t(u), std::size_t(v), w});
    top = std::max({top, std::size_t(u) + 1, std::size_t(v) + 1});
  }
  return WeightedGraph(n ? n : top, std::move(edges));
}

WeightedGraph read_edge_list(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  require(bool(in), ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_edge_list(ss.str(), n);
}

std::string format_edge_list(const WeightedGraph& g) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& e : g.edges()) os << e.u << ' ' << e.v << ' ' << e.w << '\n';
  return os.str();
}

SparseMatrix incidence(const WeightedGraph& g) {
  require(g.m() >= 1, ErrorCode::InvalidArgument, "graph has no edges");
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < g.m(); ++i) {
    const Edge& e = g.edges()[i];
    const double s = std::sqrt(e.w);
    t.push_back({i, e.u, s});
    t.push_back({i, e.v, -s});
  }
  return SparseMatrix::from_triplets(g.m(), g.n(), std::move(t));
}

SparseMatrix laplacian(const WeightedGraph& g) {
  require(g.m() >= 1, ErrorCode::InvalidArgument, "graph has no edges");
  std::vector<Triplet> t;
  for (const auto& e : g.edges()) {
    t.push_back({e.u, e.u, e.w});
    t.push_back({e.v, e.v, e.w});
    t.push_back({e.u, e.v, -e.w});
    t.push_back({e.v, e.u, -e.w});
  }
  return SparseMatrix::from_triplets(g.n(), g.n(), std::move(t));
}

WeightedGraph complete_graph(std::size_t n, double w) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.push_back({i, j, w});
  return WeightedGraph(n, std::move(e));
}

WeightedGraph path_graph(std::size_t n, double w) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, w});
  return WeightedGraph(n, std::move(e));
}

namespace {

WeightedGraph draw_gnp(std::size_t n, double p, Rng& rng, bool weighted) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < p) e.push_back({i, j, weighted ? 0.5 + 1.5 * rng.uniform() : 1.0});
  return WeightedGraph(n, std::move(e));
}

}  // namespace

WeightedGraph gnp_graph(std::size_t n, double p, std::uint64_t seed) {
  require(p >= 0 && p <= 1, ErrorCode::InvalidArgument, "p must be in [0,1]");
  Rng rng(seed, 71);
  return draw_gnp(n, p, rng, false);
}

WeightedGraph connected_gnp_graph(std::size_t n, double p, std::uint64_t seed, bool weighted) {
  require(p > 0 && p <= 1, ErrorCode::InvalidArgument, "p must be in (0,1]");
  Rng rng(seed, 72);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    WeightedGraph g = draw_gnp(n, p, rng, weighted);
    if (g.m() > 0 && g.connected()) return g;
  }
  fail(ErrorCode::NotConverged, "no connected G(n,p) draw in 1000 attempts");
}

Vector edge_leverage_scores(const WeightedGraph& g) { return leverage_exact(incidence(g).to_dense()); }

Vector relative_spectrum(const DenseMatrix& k_tilde, const DenseMatrix& k) {
  require(k.rows() == k.cols() && k_tilde.rows() == k.rows() && k_tilde.cols() == k.cols(),
          ErrorCode::DimensionMismatch, "relative_spectrum: shapes differ");
  EigResult e = sym_eig(k);
  const double tol = 1e-10 * double(k.rows()) * std::max(std::abs(e.values.back()), 1e-300);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < e.values.size(); ++i)
    if (e.values[i] > tol) keep.push_back(i);
  DenseMatrix y(k.rows(), keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const double s = 1.0 / std::sqrt(e.values[keep[c]]);
    for (std::size_t r = 0; r < k.rows(); ++r) y(r, c) = e.vectors(r, keep[c]) * s;
  }
  return sym_eig(matmul_tn(y, matmul(k_tilde, y))).values;
}

std::size_t sparsifier_samples(std::size_t n, double eps) {
  return static_cast<std::size_t>(
      std::ceil(constants::kSparsifierSamples * double(n) * std::log(double(n)) / (eps * eps)));
}

Sparsifier spectral_sparsify(const WeightedGraph& g, double eps, std::uint64_t seed) {
  require(eps > 0 && eps < 1, ErrorCode::InvalidArgument, "sparsify: eps must be in (0,1)");
  Vector lev = edge_leverage_scores(g);
  double total = 0;
  for (double x : lev) total += x;
  Vector q(lev.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = lev[i] / total;
  const std::size_t s = sparsifier_samples(g.n(), eps);
  SamplingPlan plan = rand_sampling(q, s, seed);
  std::map<std::size_t, double> merged;
  for (std::size_t j = 0; j < s; ++j) {
    const std::size_t e = plan.indices[j];
    merged[e] += g.edges()[e].w / (q[e] * double(s));
  }
  std::vector<Edge> kept;
  for (const auto& [e, w] : merged) kept.push_back({g.edges()[e].u, g.edges()[e].v, w});
  Sparsifier out;
  out.graph = WeightedGraph(g.n(), std::move(kept));
  out.samples = s;
  Vector rel = relative_spectrum(laplacian(out.graph).to_dense(), laplacian(g).to_dense());
  out.lambda_min = rel.front();
  out.lambda_max = rel.back();
  out.eps_certified = std::max(1.0 - rel.front(), rel.back() - 1.0);
  return out;
}

ChainResult recursive_chain(const WeightedGraph& g) {
  require(g.connected(), ErrorCode::InvalidArgument, "recursive_chain: graph must be connected");
  const std::size_t n = g.n();
  double wmax = 0, wmin = std::numeric_limits<double>::infinity();
  for (const auto& e : g.edges()) {
    wmax = std::max(wmax, e.w);
    wmin = std::min(wmin, e.w);
  }
  ChainResult out;
  out.lambda_u = 2.0 * double(n) * wmax;
  out.lambda_l = 8.0 * wmin / (double(n) * double(n));
  out.depth = static_cast<std::size_t>(std::ceil(std::log2(out.lambda_u / out.lambda_l)));
  for (std::size_t l = 0; l <= out.depth; ++l) out.levels.push_back({l, out.lambda_u / std::ldexp(1.0, int(l))});

  const DenseMatrix k = laplacian(g).to_dense();
  const double slack = 1e-8 * out.lambda_u;
  auto shifted = [&](double gamma) {
    DenseMatrix m = k;
    for (std::size_t i = 0; i < n; ++i) m(i, i) += gamma;
    return m;
  };
  auto min_eig = [](const DenseMatrix& m) { return sym_eig(m).values.front(); };

  // K ⪯_R K(d) ⪯_R 2K
  {
    Vector rel = relative_spectrum(shifted(out.levels.back().gamma), k);
    out.slack_final = std::min(rel.front() - 1.0, 2.0 - rel.back());
    require(out.slack_final >= -1e-8, ErrorCode::Internal, "recursive_chain: K(d) not within [K, 2K] on range(K)");
  }
  // K(ℓ) ⪯ K(ℓ−1) ⪯ 2K(ℓ)
  out.slack_adjacent = std::numeric_limits<double>::infinity();
  for (std::size_t l = 1; l <= out.depth; ++l) {
    const DenseMatrix prev = shifted(out.levels[l - 1].gamma), cur = shifted(out.levels[l].gamma);
    out.slack_adjacent = std::min({out.slack_adjacent, min_eig(prev - cur), min_eig(cur * 2.0 - prev)});
  }
  if (out.depth == 0) out.slack_adjacent = 0;
  require(out.slack_adjacent >= -slack, ErrorCode::Internal, "recursive_chain: adjacent levels out of order");
  // K(0) ⪯ 2γ(0)I ⪯ 2K(0)
  {
    const double g0 = out.levels.front().gamma;
    const DenseMatrix k0 = shifted(g0);
    DenseMatrix two_g = DenseMatrix::identity(n) * (2.0 * g0);
    out.slack_top = std::min(min_eig(two_g - k0), min_eig(k0 * 2.0 - two_g));
    require(out.slack_top >= -slack, ErrorCode::Internal, "recursive_chain: top level not sandwiched by 2γ(0)I");
  }
  return out;
}

}  // namespace snla
