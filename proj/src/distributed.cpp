#include "snla/distributed.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "snla/constants.hpp"
#include "snla/linalg.hpp"
#include "snla/rng.hpp"

namespace snla {

namespace {

constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  std::uint64_t lo = static_cast<std::uint64_t>(p & kPrime);
  std::uint64_t hi = static_cast<std::uint64_t>(p >> 61);
  std::uint64_t s = lo + hi;
  if (s >= kPrime) s -= kPrime;
  return s;
}

std::uint64_t addmod(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a + b;
  if (s >= kPrime) s -= kPrime;
  return s;
}

// Distinct field points for distinct indices: xorshift-multiply is a bijection
// on 61-bit values, and cycle-walking skips the one value ≥ p.
std::uint64_t eval_point(std::uint64_t idx) {
  std::uint64_t x = idx & kPrime;
  do {
    x ^= x >> 29;
    x = (x * 0xbf58476d1ce4e5b9ULL) & kPrime;
    x ^= x >> 32;
    x = (x * 0x94d049bb133111ebULL) & kPrime;
    x ^= x >> 29;
  } while (x >= kPrime);
  return x;
}

// entrywise sum in sorted order so the result ignores summand order
DenseMatrix ordered_sum(const std::vector<const DenseMatrix*>& parts) {
  DenseMatrix out(parts.front()->rows(), parts.front()->cols());
  std::vector<double> buf(parts.size());
  for (std::size_t e = 0; e < out.size(); ++e) {
    for (std::size_t t = 0; t < parts.size(); ++t) buf[t] = parts[t]->data()[e];
    std::sort(buf.begin(), buf.end());
    double s = 0;
    for (double x : buf) s += x;
    out.data()[e] = s;
  }
  return out;
}

DenseMatrix unpack(const Message& m, std::size_t rows, std::size_t cols) {
  require(m.reals.size() == rows * cols, ErrorCode::Internal, "message payload has the wrong size");
  return DenseMatrix(rows, cols, m.reals);
}

}  // namespace

KWiseSignMatrix::KWiseSignMatrix(std::size_t rows, std::size_t cols, std::vector<std::uint64_t> coeffs)
    : rows_(rows), cols_(cols), coeffs_(std::move(coeffs)) {
  require(rows >= 1 && cols >= 1 && !coeffs_.empty(), ErrorCode::InvalidArgument, "sign matrix needs a seed");
  require(double(rows) * double(cols) < double(kPrime), ErrorCode::InvalidArgument, "sign matrix too large");
  for (auto c : coeffs_) require(c < kPrime, ErrorCode::InvalidArgument, "coefficient outside the field");
}

std::vector<std::uint64_t> KWiseSignMatrix::draw_coefficients(std::size_t k, std::uint64_t seed) {
  std::vector<std::uint64_t> c(std::max<std::size_t>(k, 1));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = counter_hash(seed, i) % kPrime;
  return c;
}

double KWiseSignMatrix::entry(std::size_t i, std::size_t j) const {
  const std::uint64_t x = eval_point(static_cast<std::uint64_t>(i) * cols_ + j);
  std::uint64_t h = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) h = addmod(mulmod(h, x), *it);
  return ((h & 1) ? 1.0 : -1.0) / std::sqrt(double(rows_));
}

DenseMatrix KWiseSignMatrix::dense() const {
  DenseMatrix s(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) s(i, j) = entry(i, j);
  return s;
}

DenseMatrix KWiseSignMatrix::apply(const DenseMatrix& a) const {
  require(a.rows() == cols_, ErrorCode::DimensionMismatch, "sign matrix width differs from A rows");
  return matmul(dense(), a);
}

void CommLedger::record(const Message& m) {
  records_.push_back({m.from, m.to, m.round, m.words(), m.tag});
  total_ += m.words();
}

std::size_t CommLedger::words_with_tag(const std::string& tag) const {
  std::size_t w = 0;
  for (const auto& r : records_)
    if (r.tag == tag) w += r.words;
  return w;
}

std::string CommLedger::to_csv() const {
  std::ostringstream os;
  os << "from,to,round,words,tag\n";
  for (const auto& r : records_) os << r.from << ',' << r.to << ',' << r.round << ',' << r.words << ',' << r.tag << '\n';
  return os.str();
}

DenseMatrix CompressResult::combined() const {
  std::vector<DenseMatrix> parts;
  parts.reserve(servers.size());
  for (const auto& s : servers) parts.push_back(s.output.dense());
  std::vector<const DenseMatrix*> ptrs;
  for (const auto& p : parts) ptrs.push_back(&p);
  return ordered_sum(ptrs);
}

std::size_t compress_sketch_rows(std::size_t k, double eps) {
  return static_cast<std::size_t>(std::ceil(double(k) * std::log(1.0 / constants::kConstantDelta) / eps));
}

std::size_t compress_embedding_rows(std::size_t k, double eps) {
  return static_cast<std::size_t>(std::ceil(double(k) / (eps * eps * eps)));
}

std::size_t compress_expected_words(std::size_t s, std::size_t d, std::size_t k, double eps, bool integer_safe) {
  const std::size_t m = std::min(compress_sketch_rows(k, eps), d), p = compress_embedding_rows(k, eps);
  const std::size_t per = 2 * k + 2 * m * d + p * m + (integer_safe ? p * m : m * k);
  return (s - 1) * per;
}

DenseMatrix sketch_svd_projection(const DenseMatrix& sa, std::size_t k) {
  require(k >= 1 && sa.rows() >= k, ErrorCode::InvalidArgument, "sketch_svd_projection: need m >= k >= 1");
  SvdResult f = svd(sa);
  require(f.rank >= k, ErrorCode::RankDeficient, "sketch_svd_projection: rank(SA) below k");
  return f.Vt.rows_range(0, k).transpose();
}

namespace {

class Network {
 public:
  Network(CommLedger& ledger, const Wiretap& tap) : ledger_(ledger), tap_(tap) {}

  Message send(std::size_t from, std::size_t to, std::size_t round, std::string tag, Vector reals,
               std::vector<std::uint64_t> ints = {}) {
    require(from != to, ErrorCode::Internal, "self-message");
    Message m{from, to, round, std::move(tag), std::move(reals), std::move(ints)};
    ledger_.record(m);
    if (tap_) tap_(m);
    return m;
  }

 private:
  CommLedger& ledger_;
  const Wiretap& tap_;
};

// Orthonormal basis Uᵀ of the row space of SA, with SA = R_c·Uᵀ.
struct RowBasis {
  DenseMatrix U;   // d×m
  DenseMatrix Rc;  // m×m
};

RowBasis row_basis(const DenseMatrix& sa) {
  QrResult f = qr(sa.transpose());
  require(!f.rank_deficient, ErrorCode::RankDeficient, "adaptive_compress: SA lost rank");
  return {f.Q, f.R.transpose()};
}

}  // namespace

CompressResult adaptive_compress(const std::vector<DenseMatrix>& shares, std::size_t k, double eps,
                                 std::uint64_t seed, const CompressOptions& opts) {
  require(!shares.empty(), ErrorCode::InvalidArgument, "adaptive_compress: no shares");
  require(k >= 1, ErrorCode::InvalidArgument, "adaptive_compress: k must be positive");
  require(eps > 0 && eps <= 1, ErrorCode::InvalidArgument, "adaptive_compress: eps must be in (0,1]");
  const std::size_t s = shares.size(), n = shares[0].rows(), d = shares[0].cols();
  for (const auto& a : shares)
    require(a.rows() == n && a.cols() == d, ErrorCode::DimensionMismatch, "adaptive_compress: share shapes differ");
  const std::size_t m = std::min(compress_sketch_rows(k, eps), d);
  const std::size_t p = compress_embedding_rows(k, eps);
  require(m >= k, ErrorCode::InvalidArgument, "adaptive_compress: d below k");

  CompressResult out;
  out.m = m;
  out.p = p;
  Network net(out.ledger, opts.wiretap);
  out.servers.resize(s);
  for (std::size_t t = 0; t < s; ++t) {
    out.servers[t].id = t;
    out.servers[t].share = shares[t];
  }
  ServerState& lead = out.servers[0];

  // 1: S seed broadcast
  lead.s_seed = KWiseSignMatrix::draw_coefficients(k, derive_seed(seed, 501));
  for (std::size_t t = 1; t < s; ++t) out.servers[t].s_seed = net.send(0, t, 1, "seed_S", {}, lead.s_seed).ints;
  // 2: SAᵗ uploads
  std::vector<DenseMatrix> sat(s);
  for (std::size_t t = 0; t < s; ++t) sat[t] = KWiseSignMatrix(m, n, out.servers[t].s_seed).apply(shares[t]);
  std::vector<DenseMatrix> recv(s);
  recv[0] = sat[0];
  for (std::size_t t = 1; t < s; ++t) recv[t] = unpack(net.send(t, 0, 2, "SA_t", sat[t].data()), m, d);
  std::vector<const DenseMatrix*> ptrs;
  for (const auto& r : recv) ptrs.push_back(&r);
  const DenseMatrix sa = ordered_sum(ptrs);
  // 3: U (or SA itself) broadcast
  const RowBasis lead_basis = row_basis(sa);
  lead.U = lead_basis.U;
  std::vector<DenseMatrix> rc(s);
  rc[0] = lead_basis.Rc;
  for (std::size_t t = 1; t < s; ++t) {
    if (opts.integer_safe) {
      const DenseMatrix got = unpack(net.send(0, t, 3, "SA", sa.data()), m, d);
      RowBasis b = row_basis(got);
      out.servers[t].U = std::move(b.U);
      rc[t] = std::move(b.Rc);
    } else {
      out.servers[t].U = unpack(net.send(0, t, 3, "U", lead.U.data()), d, m);
    }
  }
  // 4: local AᵗU
  std::vector<DenseMatrix> atu(s);
  for (std::size_t t = 0; t < s; ++t) atu[t] = matmul(shares[t], out.servers[t].U);
  // 5–6: P seed broadcast
  lead.p_seed = KWiseSignMatrix::draw_coefficients(k, derive_seed(seed, 502));
  for (std::size_t t = 1; t < s; ++t) out.servers[t].p_seed = net.send(0, t, 5, "seed_P", {}, lead.p_seed).ints;
  // 7: PAᵗU (or PAᵗ(SA)ᵀ) uploads
  for (std::size_t t = 0; t < s; ++t) {
    const KWiseSignMatrix pm(p, n, out.servers[t].p_seed);
    const DenseMatrix pa = pm.apply(shares[t]);
    recv[t] = opts.integer_safe ? matmul_nt(pa, sa) : matmul(pa, out.servers[t].U);
    if (t > 0) recv[t] = unpack(net.send(t, 0, 7, opts.integer_safe ? "PA_t_SAt" : "PA_tU", recv[t].data()), p, m);
  }
  ptrs.clear();
  for (const auto& r : recv) ptrs.push_back(&r);
  const DenseMatrix pau_sum = ordered_sum(ptrs);
  // 8: V broadcast (or PA(SA)ᵀ, from which each server recovers V)
  auto v_from_pa_sat = [&](const DenseMatrix& pasat, const DenseMatrix& r) {
    // PAU = PA(SA)ᵀ·(R_cᵀ)⁻¹, R_cᵀ upper triangular
    return sketch_svd_projection(matmul(pasat, upper_triangular_inverse(r.transpose())), k);
  };
  if (opts.integer_safe) {
    lead.V = v_from_pa_sat(pau_sum, rc[0]);
    for (std::size_t t = 1; t < s; ++t)
      out.servers[t].V = v_from_pa_sat(unpack(net.send(0, t, 8, "PA_SAt", pau_sum.data()), p, m), rc[t]);
  } else {
    lead.V = sketch_svd_projection(pau_sum, k);
    for (std::size_t t = 1; t < s; ++t) out.servers[t].V = unpack(net.send(0, t, 8, "V", lead.V.data()), m, k);
  }
  // 9: Cᵗ = AᵗU·V·(UV)ᵀ
  for (std::size_t t = 0; t < s; ++t) {
    ServerState& st = out.servers[t];
    const DenseMatrix uv = matmul(st.U, st.V);
    st.output.k = k;
    st.output.L = matmul(atu[t], st.V);
    st.output.U = DenseMatrix::identity(k);
    st.output.R = uv.transpose();
  }
  return out;
}

}  // namespace snla
