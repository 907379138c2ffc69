#ifndef SKETCHNLA_H
#define SKETCHNLA_H

#include <stddef.h>
#include <stdint.h>

#if defined(SNLA_BUILDING)
#define SNLA_API __attribute__((visibility("default")))
#else
#define SNLA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every function returns one of these; on failure snla_last_error() says why. */
enum snla_status {
  SNLA_OK = 0,
  SNLA_ERR_INVALID_ARGUMENT = 1,
  SNLA_ERR_DIMENSION_MISMATCH = 2,
  SNLA_ERR_NOT_CONVERGED = 3,
  SNLA_ERR_RANK_DEFICIENT = 4,
  SNLA_ERR_PARSE = 5,
  SNLA_ERR_IO = 6,
  SNLA_ERR_INAPPLICABLE = 7,
  SNLA_ERR_INTERNAL = 8,
  SNLA_ERR_NULL = 9
};

enum snla_l1_embedding { SNLA_L1_CAUCHY = 0, SNLA_L1_EXPONENTIAL = 1 };
enum snla_cur_part { SNLA_CUR_C = 0, SNLA_CUR_U = 1, SNLA_CUR_R = 2 };

typedef struct snla_matrix snla_matrix;
typedef struct snla_graph snla_graph;
typedef struct snla_cur snla_cur;
typedef struct snla_protocol snla_protocol;

/* Message of the calling thread's most recent failure; "" if none. */
SNLA_API const char* snla_last_error(void);
SNLA_API const char* snla_version(void);

/* dense matrices, row-major */
SNLA_API int snla_matrix_create(size_t rows, size_t cols, const double* data, snla_matrix** out);
SNLA_API void snla_matrix_free(snla_matrix* m);
SNLA_API size_t snla_matrix_rows(const snla_matrix* m);
SNLA_API size_t snla_matrix_cols(const snla_matrix* m);
SNLA_API const double* snla_matrix_data(const snla_matrix* m);
SNLA_API int snla_matrix_read(const char* path, snla_matrix** out);
SNLA_API int snla_matrix_write(const snla_matrix* m, const char* path);
/* y = M x; y has rows(M) entries */
SNLA_API int snla_matrix_apply(const snla_matrix* m, const double* x, double* y);
SNLA_API int snla_matrix_tail_norm(const snla_matrix* a, size_t k, int spectral, double* out);
SNLA_API int snla_matrix_residual_norm(const snla_matrix* a, const snla_matrix* approx, int spectral, double* out);

SNLA_API int snla_gen_gaussian(size_t n, size_t d, uint64_t seed, snla_matrix** out);
SNLA_API int snla_gen_planted(size_t n, size_t d, size_t rank, double noise, uint64_t seed, snla_matrix** out);

/* sketch: kind is gaussian, sparse, srht, sign, cauchy, exp-diag or identity */
SNLA_API int snla_sketch_apply(const char* kind, size_t r, uint64_t seed, const snla_matrix* a, snla_matrix** out);
SNLA_API int snla_embed_verify(const char* kind, size_t r, uint64_t seed, const snla_matrix* a, double* eps_obs);

/* regression; x has cols(a) entries */
SNLA_API int snla_l2_exact(const snla_matrix* a, const double* b, double* x);
SNLA_API int snla_l2_sketch(const snla_matrix* a, const double* b, double eps, uint64_t seed, double* x);
SNLA_API int snla_l2_precond(const snla_matrix* a, const double* b, double eps, uint64_t seed, double* x,
                             size_t* iterations, double* kappa);
SNLA_API int snla_l1_small(const snla_matrix* a, const double* b, double* x, double* cost);
SNLA_API int snla_l1_sketched(const snla_matrix* a, const double* b, double eps, int embedding, uint64_t seed,
                              double* x, double* cost, size_t* sampled_rows);
SNLA_API int snla_cost(const snla_matrix* a, const double* x, const double* b, int p, double* out);

/* low rank; approximations are returned densified for the caller */
SNLA_API int snla_lowrank_frobenius(const snla_matrix* a, size_t k, double eps, uint64_t seed, snla_matrix** approx);
SNLA_API int snla_lowrank_power(const snla_matrix* a, size_t k, double eps, uint64_t seed, snla_matrix** z);
SNLA_API int snla_project_residual_norm(const snla_matrix* a, const snla_matrix* z, int spectral, double* out);

SNLA_API int snla_cur_decompose(const snla_matrix* a, size_t k, double eps, uint64_t seed, snla_cur** out);
SNLA_API void snla_cur_free(snla_cur* c);
SNLA_API int snla_cur_part(const snla_cur* c, int part, snla_matrix** out);
SNLA_API int snla_cur_product(const snla_cur* c, snla_matrix** out);
/* which: 0 columns, 1 rows. Writes up to cap indices, *count gets the full count. */
SNLA_API int snla_cur_indices(const snla_cur* c, int which, size_t* buf, size_t cap, size_t* count);
SNLA_API int snla_cur_rank_u(const snla_cur* c, size_t* rank);

/* distributed protocol */
typedef void (*snla_wiretap_fn)(void* ctx, size_t from, size_t to, size_t round, const char* tag, size_t words);
SNLA_API int snla_distributed_run(const snla_matrix* const* shares, size_t s, size_t k, double eps, uint64_t seed,
                                  int integer_safe, snla_wiretap_fn tap, void* ctx, snla_protocol** out);
SNLA_API void snla_protocol_free(snla_protocol* p);
SNLA_API size_t snla_protocol_total_words(const snla_protocol* p);
SNLA_API size_t snla_protocol_expected_words(size_t s, size_t d, size_t k, double eps, int integer_safe);
SNLA_API int snla_protocol_combined(const snla_protocol* p, snla_matrix** out);
/* 1 when every server holds bitwise-identical U and V */
SNLA_API int snla_protocol_consensus(const snla_protocol* p, int* agree);
/* CSV text from,to,round,words,tag. *needed gets the length including the terminator. */
SNLA_API int snla_protocol_ledger_csv(const snla_protocol* p, char* buf, size_t cap, size_t* needed);

/* graphs */
SNLA_API int snla_graph_create(size_t n, size_t m, const size_t* u, const size_t* v, const double* w, snla_graph** out);
SNLA_API int snla_graph_read(const char* path, snla_graph** out);
SNLA_API int snla_graph_write(const snla_graph* g, const char* path);
SNLA_API int snla_graph_complete(size_t n, snla_graph** out);
SNLA_API int snla_graph_gnp(size_t n, double p, uint64_t seed, int weighted, snla_graph** out);
SNLA_API void snla_graph_free(snla_graph* g);
SNLA_API size_t snla_graph_vertices(const snla_graph* g);
SNLA_API size_t snla_graph_edges(const snla_graph* g);
SNLA_API int snla_graph_laplacian(const snla_graph* g, snla_matrix** out);
SNLA_API int snla_sparsify(const snla_graph* g, double eps, uint64_t seed, snla_graph** out, double* eps_certified);
/* verifies all chain conditions; fails if any does not hold */
SNLA_API int snla_recursive_chain(const snla_graph* g, size_t* depth, double* min_slack);

/* analysis */
SNLA_API int snla_schatten_estimate(const snla_matrix* a, int p, double eps, uint64_t seed, double* estimate,
                                    size_t* passes);
SNLA_API int snla_schatten_exact(const snla_matrix* a, int p, double* out);
typedef double (*snla_norm_oracle)(void* ctx, const double* x, size_t n);
/* v has n entries */
SNLA_API int snla_jl_attack(snla_norm_oracle oracle, void* ctx, size_t k, size_t n, double* v, size_t* queries);

#ifdef __cplusplus
}
#endif

#endif
