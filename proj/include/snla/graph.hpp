#pragma once

#include <string>

#include "snla/matrix.hpp"

namespace snla {

struct Edge {
  std::size_t u, v;  // u < v
  double w;
};

class WeightedGraph {
 public:
  WeightedGraph() = default;
  // Orients each edge so u < v; rejects self-loops, duplicates, nonpositive weights.
  WeightedGraph(std::size_t n, std::vector<Edge> edges);

  std::size_t n() const { return n_; }
  std::size_t m() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t components() const;
  bool connected() const { return components() == 1; }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
};

// `u v w` per line, 0-based; '#' starts a comment. n is one past the largest vertex unless given.
WeightedGraph parse_edge_list(const std::string& text, std::size_t n = 0);
WeightedGraph read_edge_list(const std::string& path, std::size_t n = 0);
std::string format_edge_list(const WeightedGraph& g);

// rows √w_e (e_u − e_v)
SparseMatrix incidence(const WeightedGraph& g);
SparseMatrix laplacian(const WeightedGraph& g);

WeightedGraph complete_graph(std::size_t n, double w = 1.0);
WeightedGraph path_graph(std::size_t n, double w = 1.0);
WeightedGraph gnp_graph(std::size_t n, double p, std::uint64_t seed);
// G(n,p) redrawn until connected; with weighted, weights uniform in [1/2, 2].
WeightedGraph connected_gnp_graph(std::size_t n, double p, std::uint64_t seed, bool weighted = false);

Vector edge_leverage_scores(const WeightedGraph& g);

// Generalized eigenvalues of (K̃, K) on range(K), ascending.
Vector relative_spectrum(const DenseMatrix& k_tilde, const DenseMatrix& k);

struct Sparsifier {
  WeightedGraph graph;
  std::size_t samples = 0;
  double eps_certified = 0;  // max |λ − 1| over relative_spectrum
  double lambda_min = 0;
  double lambda_max = 0;
};

std::size_t sparsifier_samples(std::size_t n, double eps);
Sparsifier spectral_sparsify(const WeightedGraph& g, double eps, std::uint64_t seed);

struct ChainLevel {
  std::size_t level = 0;
  double gamma = 0;
};

struct ChainResult {
  double lambda_u = 0;
  double lambda_l = 0;
  std::size_t depth = 0;
  std::vector<ChainLevel> levels;  // ℓ = 0..depth
  // smallest slack seen in each condition (≥ −tolerance when satisfied)
  double slack_final = 0;    // K ⪯_R K(d) ⪯_R 2K
  double slack_adjacent = 0; // K(ℓ) ⪯ K(ℓ−1) ⪯ 2K(ℓ)
  double slack_top = 0;      // K(0) ⪯ 2γ(0)I ⪯ 2K(0)
};

ChainResult recursive_chain(const WeightedGraph& g);

}  // namespace snla
