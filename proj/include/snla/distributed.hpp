#pragma once

#include <functional>
#include <string>

#include "snla/lowrank.hpp"
#include "snla/matrix.hpp"

namespace snla {

// Sign matrix whose entries are ±1/√rows, k-wise independent: parity of a
// degree-(k−1) polynomial over GF(2⁶¹−1), coefficients as the seed words,
// evaluated at a fixed scrambled point per entry.
class KWiseSignMatrix {
 public:
  KWiseSignMatrix(std::size_t rows, std::size_t cols, std::vector<std::uint64_t> coeffs);
  static std::vector<std::uint64_t> draw_coefficients(std::size_t k, std::uint64_t seed);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<std::uint64_t>& coefficients() const { return coeffs_; }
  double entry(std::size_t i, std::size_t j) const;
  DenseMatrix apply(const DenseMatrix& a) const;
  DenseMatrix dense() const;

 private:
  std::size_t rows_, cols_;
  std::vector<std::uint64_t> coeffs_;
};

struct Message {
  std::size_t from = 0;
  std::size_t to = 0;
  std::size_t round = 0;
  std::string tag;
  Vector reals;
  std::vector<std::uint64_t> ints;

  std::size_t words() const { return reals.size() + ints.size(); }
};

struct MessageRecord {
  std::size_t from, to, round, words;
  std::string tag;
};

class CommLedger {
 public:
  void record(const Message& m);
  const std::vector<MessageRecord>& records() const { return records_; }
  std::size_t total_words() const { return total_; }
  std::size_t words_with_tag(const std::string& tag) const;
  // columns from,to,round,words,tag
  std::string to_csv() const;

 private:
  std::vector<MessageRecord> records_;
  std::size_t total_ = 0;
};

using Wiretap = std::function<void(const Message&)>;

struct ServerState {
  std::size_t id = 0;
  DenseMatrix share;
  std::vector<std::uint64_t> s_seed;
  std::vector<std::uint64_t> p_seed;
  DenseMatrix U;  // d×m, orthonormal columns
  DenseMatrix V;  // m×k
  FactoredLowRank output;  // Aᵗ·U·V  times  (U·V)ᵀ
};

struct CompressOptions {
  bool integer_safe = false;
  Wiretap wiretap;
};

struct CompressResult {
  std::vector<ServerState> servers;
  CommLedger ledger;
  std::size_t m = 0;  // rows of S
  std::size_t p = 0;  // rows of P

  // Σ_t Cᵗ, summed entrywise in sorted order
  DenseMatrix combined() const;
};

std::size_t compress_sketch_rows(std::size_t k, double eps);
std::size_t compress_embedding_rows(std::size_t k, double eps);
// (s−1)(2k + 2md + pm + mk), or (s−1)(2k + 2md + 2pm) with integer_safe
std::size_t compress_expected_words(std::size_t s, std::size_t d, std::size_t k, double eps, bool integer_safe);

CompressResult adaptive_compress(const std::vector<DenseMatrix>& shares, std::size_t k, double eps,
                                 std::uint64_t seed, const CompressOptions& opts = {});

// Top-k right singular vectors of SA as a d×k matrix.
DenseMatrix sketch_svd_projection(const DenseMatrix& sa, std::size_t k);

}  // namespace snla
