#include "sketchnla.h"

#include <cstring>
#include <new>
#include <string>

#include "snla/analysis.hpp"
#include "snla/cur.hpp"
#include "snla/distributed.hpp"
#include "snla/generate.hpp"
#include "snla/graph.hpp"
#include "snla/linalg.hpp"
#include "snla/lowrank.hpp"
#include "snla/mmio.hpp"
#include "snla/regress.hpp"
#include "snla/sketch.hpp"

struct snla_matrix {
  snla::DenseMatrix m;
};
struct snla_graph {
  snla::WeightedGraph g;
};
struct snla_cur {
  snla::CurResult r;
};
struct snla_protocol {
  snla::CompressResult r;
};

namespace {

thread_local std::string g_last_error;

template <class F>
int guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SNLA_OK;
  } catch (const snla::Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SNLA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SNLA_ERR_INTERNAL;
  }
}

void need(const void* p, const char* name) {
  if (!p) snla::fail(snla::ErrorCode::InvalidArgument, std::string(name) + " is null");
}

int null_error(const char* name) {
  g_last_error = std::string(name) + " is null";
  return SNLA_ERR_NULL;
}

snla_matrix* wrap(snla::DenseMatrix m) { return new snla_matrix{std::move(m)}; }

std::span<const double> span_of(const double* p, std::size_t n) { return {p, n}; }

void copy_out(const snla::Vector& v, double* out) { std::memcpy(out, v.data(), v.size() * sizeof(double)); }

}  // namespace

#define SNLA_REQUIRE(p)                \
  do {                                 \
    if (!(p)) return null_error(#p);   \
  } while (0)

extern "C" {

const char* snla_last_error(void) { return g_last_error.c_str(); }
const char* snla_version(void) { return "1.0.0"; }

int snla_matrix_create(size_t rows, size_t cols, const double* data, snla_matrix** out) {
  SNLA_REQUIRE(out);
  return guard([&] {
    if (data)
      *out = wrap(snla::DenseMatrix(rows, cols, std::vector<double>(data, data + rows * cols)));
    else
      *out = wrap(snla::DenseMatrix(rows, cols));
  });
}

void snla_matrix_free(snla_matrix* m) { delete m; }
size_t snla_matrix_rows(const snla_matrix* m) { return m ? m->m.rows() : 0; }
size_t snla_matrix_cols(const snla_matrix* m) { return m ? m->m.cols() : 0; }
const double* snla_matrix_data(const snla_matrix* m) { return m ? m->m.data().data() : nullptr; }

int snla_matrix_read(const char* path, snla_matrix** out) {
  SNLA_REQUIRE(path);
  SNLA_REQUIRE(out);
  return guard([&] { *out = wrap(snla::mm_read_dense(path)); });
}

int snla_matrix_write(const snla_matrix* m, const char* path) {
  SNLA_REQUIRE(m);
  SNLA_REQUIRE(path);
  return guard([&] { snla::mm_write(m->m, path); });
}

int snla_matrix_apply(const snla_matrix* m, const double* x, double* y) {
  SNLA_REQUIRE(m);
  SNLA_REQUIRE(x);
  SNLA_REQUIRE(y);
  return guard([&] { copy_out(snla::matvec(m->m, span_of(x, m->m.cols())), y); });
}

int snla_matrix_tail_norm(const snla_matrix* a, size_t k, int spectral, double* out) {
  SNLA_REQUIRE(a);
  SNLA_REQUIRE(out);
  return guard([&] { *out = snla::tail_norm(a->m, k, spectral != 0); });
}

int snla_matrix_residual_norm(const snla_matrix* a, const snla_matrix* approx, int spectral, double* out) {
  SNLA_REQUIRE(a);
  SNLA_REQUIRE(approx);
  SNLA_REQUIRE(out);
  return guard([&] {
    snla::require(a->m.rows() == approx->m.rows() && a->m.cols() == approx->m.cols(),
                  snla::ErrorCode::DimensionMismatch, "approximation shape differs from A");
    const snla::DenseMatrix diff = a->m - approx->m;
    *out = spectral ? snla::spectral_norm(diff) : diff.frobenius();
  });
}

int snla_gen_gaussian(size_t n, size_t d, uint64_t seed, snla_matrix** out) {
  SNLA_REQUIRE(out);
  return guard([&] { *out = wrap(snla::gaussian_matrix(n, d, seed)); });
}

int snla_gen_planted(size_t n, size_t d, size_t rank, double noise, uint64_t seed, snla_matrix** out) {
  SNLA_REQUIRE(out);
  return guard([&] { *out = wrap(snla::planted_rank_matrix(n, d, rank, noise, seed)); });
}

int snla_sketch_apply(const char* kind, size_t r, uint64_t seed, const snla_matrix* a, snla_matrix** out) {
  SNLA_REQUIRE(kind);
  SNLA_REQUIRE(a);
  SNLA_REQUIRE(out);
  return guard([&] {
    auto s = snla::make_sketch(snla::parse_kind(kind), r, a->m.rows(), seed);
    *out = wrap(snla::apply_sketch(s, a->m));
  });
}

int snla_embed_verify(const char* kind, size_t r, uint64_t seed, const snla_matrix* a, double* eps_obs) {
  SNLA_REQUIRE(kind);
  SNLA_REQUIRE(a);
  SNLA_REQUIRE(eps_obs);
  return guard([&] {
    auto s = snla::make_sketch(snla::parse_kind(kind), r, a->m.rows(), seed);
    *eps_obs = snla::verify_embedding(s, a->m).eps_obs;
  });
}

int snla_l2_exact(const snla_matrix* a, const double* b, double* x) {
  SNLA_REQUIRE(a);
  SNLA_REQUIRE(b);
  SNLA_REQUIRE(x);
  return guard([&] { copy_out(snla::solve_l2_exact(a->m, span_of(b, a->m.rows())), x); });
}

int snla_l2_sketch(const snla_matrix* a, const double* b, double eps, uint64_t seed, double* x) {
  SNLA_REQUIRE(a);
  SNLA_REQUIRE(b);
  SNLA_REQUIRE(x);
  return guard([&] { copy_out(snla::sketch_solve_l2(a->m, span_of(b, a->m.rows()), eps, seed), x); });
}

int snla_l2_precond(const snla_matrix* a, const double* b, double eps, uint64_t seed, double* x, size_t* iterations,
                    double* kappa) {
  SNLA_REQUIRE(a);
  SNLA_REQUIRE(b);
  SNLA_REQUIRE(x);
  return guard([&] {
    auto tr = snla::precond_solve_l2(a->m, span_of(b, a->m.rows()), eps, seed);
    copy_out(tr.x, x);
    if (iterations) *iterations = tr.iterations;
    if (kappa) *kappa = tr.kappa;
  });
}

int snla_l1_small(const snla_matrix* a, const double* b, double* x, double* cost) {
  SNLA_REQUIRE(a);
  SNLA_REQUIRE(b);
  SNLA_REQUIRE(x);
  return guard([&] {
    auto sol = snla::solve_l1_small(a->m, span_of(b, a->m.rows()));
    copy_out(sol.x, x);
    if (cost) *cost = sol.cost;
  });
}

int snla_l1_sketched(const snla_matrix* a, const double* b, double eps, int embedding, uint64_t seed, double* x,
                     double* cost, size_t* sampled_rows) {
  SNLA_REQUIRE(a);
  SNLA_REQUIRE(b);
  SNLA_REQUIRE(x);
  return guard([&] {
    snla::require(embedding == SNLA_L1_CAUCHY || embedding == SNLA_L1_EXPONENTIAL, snla::ErrorCode::InvalidArgument,
                  "unknown l1 embedding");
    auto kind = embedding == SNLA_L1_CAUCHY ? snla::L1Embedding::Cauchy : snla::L1Embedding::ExpCountSketch;
    auto sol = snla::solve_l1_sketched(a->m, span_of(b, a->m.rows()), eps, kind, seed);
    copy_out(sol.x, x);
    if (cost) *cost = sol.cost;
    if (sampled_rows) *sampled_rows = sol.sampled_rows;
  });
}

int snla_cost(const snla_matrix* a, const double* x, const double* b, int p, double* out) {
  SNLA_REQUIRE(a);
  SNLA_REQUIRE(x);
  SNLA_REQUIRE(b);
  SNLA_REQUIRE(out);
  return guard([&] {
    snla::require(p == 1 || p == 2, snla::ErrorCode::InvalidArgument, "p must be 1 or 2");
    auto xs = span_of(x, a->m.cols());
    auto bs = span_of(b, a->m.rows());
    *out = p == 1 ? snla::l1_cost(a->m, xs, bs) : snla::l2_cost(a->m, xs, bs);
  });
}

int snla_lowrank_frobenius(const snla_matrix* a, size_t k, double eps, uint64_t seed, snla_matrix** approx) {
  SNLA_REQUIRE(a);
  SNLA_REQUIRE(approx);
  return guard([&] { *approx = wrap(snla::frobenius_lowrank(a->m, k, eps, seed).dense()); });
}

int snla_lowrank_power(const snla_matrix* a, size_t k, double eps, uint64_t seed, snla_matrix** z) {
  SNLA_REQUIRE(a);
  SNLA_REQUIRE(z);
  return guard([&] { *z = wrap(snla::spectral_lowrank_power(a->m, k, eps, seed).Z); });
}

int snla_project_residual_norm(const snla_matrix* a, const snla_matrix* z, int spectral, double* out) {
  SNLA_REQUIRE(a);
  SNLA_REQUIRE(z);
  SNLA_REQUIRE(out);
  return guard([&] { *out = snla::project_residual_norm(a->m, z->m, spectral != 0); });
}

int snla_cur_decompose(const snla_matrix* a, size_t k, double eps, uint64_t seed, snla_cur** out) {
  SNLA_REQUIRE(a);
  SNLA_REQUIRE(out);
  return guard([&] { *out = new snla_cur{snla::cur_decompose(a->m, k, eps, seed)}; });
}

void snla_cur_free(snla_cur* c) { delete c; }

int snla_cur_part(const snla_cur* c, int part, snla_matrix** out) {
  SNLA_REQUIRE(c);
  SNLA_REQUIRE(out);
  return guard([&] {
    switch (part) {
      case SNLA_CUR_C: *out = wrap(c->r.C); break;
      case SNLA_CUR_U: *out = wrap(c->r.U); break;
      case SNLA_CUR_R: *out = wrap(c->r.R); break;
      default: snla::fail(snla::ErrorCode::InvalidArgument, "unknown CUR part");
    }
  });
}

int snla_cur_product(const snla_cur* c, snla_matrix** out) {
  SNLA_REQUIRE(c);
  SNLA_REQUIRE(out);
  return guard([&] { *out = wrap(c->r.product()); });
}

int snla_cur_indices(const snla_cur* c, int which, size_t* buf, size_t cap, size_t* count) {
  SNLA_REQUIRE(c);
  SNLA_REQUIRE(count);
  return guard([&] {
    snla::require(which == 0 || which == 1, snla::ErrorCode::InvalidArgument, "which must be 0 or 1");
    const auto& idx = which == 0 ? c->r.col_indices : c->r.row_indices;
    *count = idx.size();
    if (buf)
      for (std::size_t i = 0; i < idx.size() && i < cap; ++i) buf[i] = idx[i];
  });
}

int snla_cur_rank_u(const snla_cur* c, size_t* rank) {
  SNLA_REQUIRE(c);
  SNLA_REQUIRE(rank);
  return guard([&] { *rank = snla::numerical_rank(c->r.U); });
}

int snla_distributed_run(const snla_matrix* const* shares, size_t s, size_t k, double eps, uint64_t seed,
                         int integer_safe, snla_wiretap_fn tap, void* ctx, snla_protocol** out) {
  SNLA_REQUIRE(shares);
  SNLA_REQUIRE(out);
  return guard([&] {
    std::vector<snla::DenseMatrix> parts;
    for (std::size_t t = 0; t < s; ++t) {
      need(shares[t], "share");
      parts.push_back(shares[t]->m);
    }
    snla::CompressOptions opts;
    opts.integer_safe = integer_safe != 0;
    if (tap)
      opts.wiretap = [tap, ctx](const snla::Message& m) { tap(ctx, m.from, m.to, m.round, m.tag.c_str(), m.words()); };
    *out = new snla_protocol{snla::adaptive_compress(parts, k, eps, seed, opts)};
  });
}

void snla_protocol_free(snla_protocol* p) { delete p; }
size_t snla_protocol_total_words(const snla_protocol* p) { return p ? p->r.ledger.total_words() : 0; }

size_t snla_protocol_expected_words(size_t s, size_t d, size_t k, double eps, int integer_safe) {
  if (s == 0 || k == 0 || !(eps > 0)) return 0;
  return snla::compress_expected_words(s, d, k, eps, integer_safe != 0);
}

int snla_protocol_combined(const snla_protocol* p, snla_matrix** out) {
  SNLA_REQUIRE(p);
  SNLA_REQUIRE(out);
  return guard([&] { *out = wrap(p->r.combined()); });
}

int snla_protocol_consensus(const snla_protocol* p, int* agree) {
  SNLA_REQUIRE(p);
  SNLA_REQUIRE(agree);
  return guard([&] {
    const auto& lead = p->r.servers.front();
    bool ok = true;
    for (const auto& s : p->r.servers)
      ok = ok && s.U.data() == lead.U.data() && s.V.data() == lead.V.data();
    *agree = ok ? 1 : 0;
  });
}

int snla_protocol_ledger_csv(const snla_protocol* p, char* buf, size_t cap, size_t* needed) {
  SNLA_REQUIRE(p);
  return guard([&] {
    const std::string csv = p->r.ledger.to_csv();
    if (needed) *needed = csv.size() + 1;
    if (buf && cap > 0) {
      const std::size_t n = std::min(cap - 1, csv.size());
      std::memcpy(buf, csv.data(), n);
      buf[n] = '\0';
    }
  });
}

int snla_graph_create(size_t n, size_t m, const size_t* u, const size_t* v, const double* w, snla_graph** out) {
  SNLA_REQUIRE(out);
  if (m > 0) {
    SNLA_REQUIRE(u);
    SNLA_REQUIRE(v);
    SNLA_REQUIRE(w);
  }
  return guard([&] {
    std::vector<snla::Edge> e(m);
    for (std::size_t i = 0; i < m; ++i) e[i] = {u[i], v[i], w[i]};
    *out = new snla_graph{snla::WeightedGraph(n, std::move(e))};
  });
}

int snla_graph_read(const char* path, snla_graph** out) {
  SNLA_REQUIRE(path);
  SNLA_REQUIRE(out);
  return guard([&] { *out = new snla_graph{snla::read_edge_list(path)}; });
}

int snla_graph_write(const snla_graph* g, const char* path) {
  SNLA_REQUIRE(g);
  SNLA_REQUIRE(path);
  return guard([&] { snla::write_file_atomic(path, snla::format_edge_list(g->g)); });
}

int snla_graph_complete(size_t n, snla_graph** out) {
  SNLA_REQUIRE(out);
  return guard([&] { *out = new snla_graph{snla::complete_graph(n)}; });
}

int snla_graph_gnp(size_t n, double p, uint64_t seed, int weighted, snla_graph** out) {
  SNLA_REQUIRE(out);
  return guard([&] { *out = new snla_graph{snla::connected_gnp_graph(n, p, seed, weighted != 0)}; });
}

void snla_graph_free(snla_graph* g) { delete g; }
size_t snla_graph_vertices(const snla_graph* g) { return g ? g->g.n() : 0; }
size_t snla_graph_edges(const snla_graph* g) { return g ? g->g.m() : 0; }

int snla_graph_laplacian(const snla_graph* g, snla_matrix** out) {
  SNLA_REQUIRE(g);
  SNLA_REQUIRE(out);
  return guard([&] { *out = wrap(snla::laplacian(g->g).to_dense()); });
}

int snla_sparsify(const snla_graph* g, double eps, uint64_t seed, snla_graph** out, double* eps_certified) {
  SNLA_REQUIRE(g);
  SNLA_REQUIRE(out);
  return guard([&] {
    auto sp = snla::spectral_sparsify(g->g, eps, seed);
    if (eps_certified) *eps_certified = sp.eps_certified;
    *out = new snla_graph{std::move(sp.graph)};
  });
}

int snla_recursive_chain(const snla_graph* g, size_t* depth, double* min_slack) {
  SNLA_REQUIRE(g);
  return guard([&] {
    auto c = snla::recursive_chain(g->g);
    if (depth) *depth = c.depth;
    if (min_slack) *min_slack = std::min({c.slack_final, c.slack_adjacent, c.slack_top});
  });
}

int snla_schatten_estimate(const snla_matrix* a, int p, double eps, uint64_t seed, double* estimate, size_t* passes) {
  SNLA_REQUIRE(a);
  SNLA_REQUIRE(estimate);
  return guard([&] {
    auto e = snla::schatten_estimate(a->m, p, eps, seed);
    *estimate = e.estimate;
    if (passes) *passes = e.passes;
  });
}

int snla_schatten_exact(const snla_matrix* a, int p, double* out) {
  SNLA_REQUIRE(a);
  SNLA_REQUIRE(out);
  return guard([&] { *out = snla::schatten_exact(a->m, p); });
}

int snla_jl_attack(snla_norm_oracle oracle, void* ctx, size_t k, size_t n, double* v, size_t* queries) {
  SNLA_REQUIRE(oracle);
  SNLA_REQUIRE(v);
  return guard([&] {
    auto r = snla::jl_attack([&](std::span<const double> x) { return oracle(ctx, x.data(), x.size()); }, k, n);
    copy_out(r.v, v);
    if (queries) *queries = r.queries;
  });
}

}  // extern "C"
