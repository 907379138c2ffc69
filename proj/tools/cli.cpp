#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sketchnla.h"

using json = nlohmann::ordered_json;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(int rc, const std::string& what) {
  if (rc != SNLA_OK) throw Failure(what + ": " + snla_last_error());
}

struct MatrixDeleter {
  void operator()(snla_matrix* m) const { snla_matrix_free(m); }
};
struct GraphDeleter {
  void operator()(snla_graph* g) const { snla_graph_free(g); }
};
using Matrix = std::unique_ptr<snla_matrix, MatrixDeleter>;
using Graph = std::unique_ptr<snla_graph, GraphDeleter>;

Matrix read_matrix(const std::string& path) {
  snla_matrix* m = nullptr;
  check(snla_matrix_read(path.c_str(), &m), "reading " + path);
  return Matrix(m);
}

Matrix make_matrix(std::size_t r, std::size_t c, const std::vector<double>& data) {
  snla_matrix* m = nullptr;
  check(snla_matrix_create(r, c, data.data(), &m), "building matrix");
  return Matrix(m);
}

std::vector<double> values(const snla_matrix* m) {
  const double* p = snla_matrix_data(m);
  return std::vector<double>(p, p + snla_matrix_rows(m) * snla_matrix_cols(m));
}

std::vector<double> read_vector(const std::string& path, std::size_t n) {
  Matrix m = read_matrix(path);
  const std::size_t r = snla_matrix_rows(m.get()), c = snla_matrix_cols(m.get());
  if (r * c != n || std::min(r, c) != 1)
    throw Failure(path + " must hold a vector of length " + std::to_string(n));
  return values(m.get());
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    const auto dots = part.find("..");
    try {
      if (dots == std::string::npos) {
        out.push_back(std::stoull(part));
      } else {
        const std::uint64_t a = std::stoull(part.substr(0, dots)), b = std::stoull(part.substr(dots + 2));
        if (b < a) throw Failure("seed range " + part + " is empty");
        for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw Failure("bad seed list '" + text + "'");
    }
  }
  if (out.empty()) throw Failure("no seeds given");
  return out;
}

std::size_t thread_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SKETCH_NLA_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) n = std::min<std::size_t>(n, std::size_t(v));
  }
  return n;
}

// Runs f(seed) for each seed, parallel across seeds, results in seed order.
std::vector<json> for_each_seed(const std::vector<std::uint64_t>& seeds, const std::function<json(std::uint64_t)>& f) {
  std::vector<json> out(seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::optional<std::string> err;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next++;
      if (i >= seeds.size()) return;
      try {
        out[i] = f(seeds[i]);
        out[i]["seed"] = seeds[i];
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = "seed " + std::to_string(seeds[i]) + ": " + e.what();
      }
    }
  };
  const std::size_t nt = std::min(thread_count(), seeds.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (err) throw Failure(*err);
  for (auto& m : out) {
    json ordered;
    ordered["seed"] = m["seed"];
    for (auto it = m.begin(); it != m.end(); ++it)
      if (it.key() != "seed") ordered[it.key()] = it.value();
    m = std::move(ordered);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Failure("cannot write " + tmp);
    f << text;
    if (!f) throw Failure("short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Failure("rename to " + path + ": " + ec.message());
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const double pos = q * double(v.size() - 1);
  const std::size_t lo = std::size_t(std::floor(pos)), hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

json quantiles(const std::vector<json>& metrics, const std::string& key) {
  std::vector<double> v;
  for (const auto& m : metrics) v.push_back(m.at(key).get<double>());
  return json{{"min", quantile(v, 0)}, {"median", quantile(v, 0.5)}, {"q90", quantile(v, 0.9)}, {"max", quantile(v, 1)}};
}

double fraction(const std::vector<json>& metrics, const std::function<bool(const json&)>& ok) {
  std::size_t n = 0;
  for (const auto& m : metrics) n += ok(m) ? 1 : 0;
  return double(n) / double(metrics.size());
}

struct Output {
  std::string report;
  std::string csv;
};

// One CSV row per seed; columns are the metric keys in order.
std::string metrics_csv(const std::vector<json>& metrics) {
  std::ostringstream os;
  bool first = true;
  for (auto it = metrics.front().begin(); it != metrics.front().end(); ++it) {
    os << (first ? "" : ",") << it.key();
    first = false;
  }
  os << '\n';
  os.precision(17);
  for (const auto& m : metrics) {
    first = true;
    for (auto it = m.begin(); it != m.end(); ++it) {
      os << (first ? "" : ",");
      if (it->is_string())
        os << it->get<std::string>();
      else
        os << it->dump();
      first = false;
    }
    os << '\n';
  }
  return os.str();
}

int finish(const std::string& command, const json& params, const std::vector<std::uint64_t>& seeds,
           const std::vector<json>& metrics, json aggregate, bool pass, const Output& out) {
  json report;
  report["schema"] = 1;
  report["command"] = command;
  report["params"] = params;
  report["seeds"] = seeds;
  report["metrics"] = metrics;
  report["aggregate"] = std::move(aggregate);
  report["pass"] = pass;
  const std::string text = report.dump(2) + "\n";
  if (out.report.empty())
    std::cout << text;
  else
    write_text(out.report, text);
  if (!out.csv.empty() && !metrics.empty()) write_text(out.csv, metrics_csv(metrics));
  std::cerr << command << ": " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

void add_common(CLI::App* sub, std::string& seeds, Output& out) {
  sub->add_option("--seeds", seeds, "seed list, e.g. 0..99 or 1,2,5")->capture_default_str();
  sub->add_option("--report", out.report, "JSON report path (stdout if omitted)");
  sub->add_option("--csv", out.csv, "per-seed CSV path (columns: seed then the metric keys)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sketch-nla: randomized sketching experiments"};
  app.require_subcommand(1);
  std::string seeds_text = "0..9";
  Output out;

  // gen
  auto* gen = app.add_subcommand("gen", "write a generated matrix (Matrix Market) or graph (edge list)");
  std::size_t g_rank = 0, g_n = 0, g_d = 1;
  bool g_gauss = false;
  double g_noise = 0, g_p = 0.3;
  std::uint64_t g_seed = 0;
  std::string g_out, g_graph;
  gen->add_option("--planted-rank", g_rank, "rank of the planted component");
  gen->add_flag("--gaussian", g_gauss, "i.i.d. N(0,1) entries");
  gen->add_option("--graph", g_graph, "graph family: complete or gnp")->check(CLI::IsMember({"complete", "gnp"}));
  gen->add_option("--n", g_n, "rows, or vertices for graphs")->required();
  gen->add_option("--d", g_d, "columns")->capture_default_str();
  gen->add_option("--noise", g_noise, "noise level for planted-rank")->capture_default_str();
  gen->add_option("--p", g_p, "edge probability for gnp")->capture_default_str();
  gen->add_option("--seed", g_seed, "generator seed")->capture_default_str();
  gen->add_option("--out", g_out, "output path")->required();

  // embed-verify
  auto* ev = app.add_subcommand("embed-verify", "check the subspace-embedding distortion of a sketch family");
  std::string ev_in, ev_kind = "gaussian";
  std::size_t ev_n = 2000, ev_d = 8, ev_r = 0;
  double ev_eps = 0.5, ev_delta = 0.01;
  ev->add_option("--in", ev_in, "matrix (Matrix Market); random Gaussian if omitted");
  ev->add_option("--n", ev_n)->capture_default_str();
  ev->add_option("--d", ev_d)->capture_default_str();
  ev->add_option("--kind", ev_kind, "gaussian, sparse, srht, sign, cauchy, identity")->capture_default_str();
  ev->add_option("--r", ev_r, "sketch rows")->required();
  ev->add_option("--eps", ev_eps)->capture_default_str();
  ev->add_option("--delta", ev_delta, "allowed failure fraction")->capture_default_str();
  add_common(ev, seeds_text, out);

  // regress-l2
  auto* l2 = app.add_subcommand("regress-l2", "sketched least squares against the exact solver");
  std::string l2_in, l2_b, l2_method = "sketch";
  double l2_eps = 0.5;
  l2->add_option("--in", l2_in)->required();
  l2->add_option("--b", l2_b)->required();
  l2->add_option("--eps", l2_eps)->capture_default_str();
  l2->add_option("--method", l2_method, "sketch or precond")
      ->check(CLI::IsMember({"sketch", "precond"}))
      ->capture_default_str();
  add_common(l2, seeds_text, out);

  // regress-l1
  auto* l1 = app.add_subcommand("regress-l1", "sampled least absolute deviations against the full solver");
  std::string l1_in, l1_b, l1_emb = "cauchy";
  double l1_eps = 0.5;
  l1->add_option("--in", l1_in)->required();
  l1->add_option("--b", l1_b)->required();
  l1->add_option("--eps", l1_eps)->capture_default_str();
  l1->add_option("--embedding", l1_emb, "cauchy or exponential")
      ->check(CLI::IsMember({"cauchy", "exponential"}))
      ->capture_default_str();
  add_common(l1, seeds_text, out);

  // lowrank
  auto* lr = app.add_subcommand("lowrank", "sketched rank-k approximation against the SVD");
  std::string lr_in, lr_method = "frobenius";
  std::size_t lr_k = 5;
  double lr_eps = 0.5;
  lr->add_option("--in", lr_in)->required();
  lr->add_option("--k", lr_k)->capture_default_str();
  lr->add_option("--eps", lr_eps)->capture_default_str();
  lr->add_option("--method", lr_method, "frobenius or power")
      ->check(CLI::IsMember({"frobenius", "power"}))
      ->capture_default_str();
  add_common(lr, seeds_text, out);

  // cur
  auto* cu = app.add_subcommand("cur", "CUR decomposition against the SVD");
  std::string cu_in;
  std::size_t cu_k = 4;
  double cu_eps = 0.5;
  cu->add_option("--in", cu_in)->required();
  cu->add_option("--k", cu_k)->capture_default_str();
  cu->add_option("--eps", cu_eps)->capture_default_str();
  add_common(cu, seeds_text, out);

  // distributed
  auto* di = app.add_subcommand("distributed", "simulate the s-server low-rank protocol");
  std::string di_scenario, di_in, di_ledger;
  std::size_t di_s = 3, di_n = 200, di_d = 40, di_k = 5, di_rank = 5;
  double di_eps = 0.5, di_noise = 0.1;
  bool di_int = false;
  di->add_option("--scenario", di_scenario, "JSON {s, n, d, k, eps, seed, generator: {planted_rank, noise}}");
  di->add_option("--in", di_in, "matrix to split into shares instead of generating one");
  di->add_option("--s", di_s)->capture_default_str();
  di->add_option("--n", di_n)->capture_default_str();
  di->add_option("--d", di_d)->capture_default_str();
  di->add_option("--k", di_k)->capture_default_str();
  di->add_option("--rank", di_rank, "planted rank of the generated matrix")->capture_default_str();
  di->add_option("--noise", di_noise)->capture_default_str();
  di->add_option("--eps", di_eps)->capture_default_str();
  di->add_flag("--integer-safe", di_int, "send SA and PAᵗ(SA)ᵀ instead of U and PAᵗU");
  di->add_option("--ledger", di_ledger, "CSV ledger of the first seed (from,to,round,words,tag)");
  add_common(di, seeds_text, out);

  // sparsify
  auto* sp = app.add_subcommand("sparsify", "leverage-score spectral sparsifier with eigenvalue certificate");
  std::string sp_graph, sp_family, sp_out;
  std::size_t sp_n = 20;
  double sp_p = 0.3, sp_eps = 0.5;
  sp->add_option("--graph", sp_graph, "edge list `u v w`, 0-based");
  sp->add_option("--family", sp_family, "complete or gnp when no --graph")->check(CLI::IsMember({"complete", "gnp"}));
  sp->add_option("--n", sp_n)->capture_default_str();
  sp->add_option("--p", sp_p)->capture_default_str();
  sp->add_option("--eps", sp_eps)->capture_default_str();
  sp->add_option("--out", sp_out, "edge list of the first seed's sparsifier");
  add_common(sp, seeds_text, out);

  // schatten
  auto* sc = app.add_subcommand("schatten", "Schatten-p norm estimator");
  std::string sc_in;
  int sc_p = 2;
  double sc_eps = 0.3;
  sc->add_option("--in", sc_in)->required();
  sc->add_option("--p", sc_p)->capture_default_str();
  sc->add_option("--eps", sc_eps)->capture_default_str();
  add_common(sc, seeds_text, out);

  // attack-jl
  auto* at = app.add_subcommand("attack-jl", "adaptive attack on a Gaussian JL sketch");
  std::size_t at_k = 5, at_n = 0;
  at->add_option("--k", at_k)->capture_default_str();
  at->add_option("--n", at_n, "ambient dimension (default 2k)");
  add_common(at, seeds_text, out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      if (!g_graph.empty()) {
        snla_graph* g = nullptr;
        check(g_graph == "complete" ? snla_graph_complete(g_n, &g) : snla_graph_gnp(g_n, g_p, g_seed, 0, &g), "gen");
        Graph gg(g);
        check(snla_graph_write(gg.get(), g_out.c_str()), "writing " + g_out);
        return 0;
      }
      if ((g_rank > 0) == g_gauss) throw Failure("gen: give exactly one of --planted-rank, --gaussian, --graph");
      snla_matrix* m = nullptr;
      check(g_gauss ? snla_gen_gaussian(g_n, g_d, g_seed, &m) : snla_gen_planted(g_n, g_d, g_rank, g_noise, g_seed, &m),
            "gen");
      Matrix mm(m);
      check(snla_matrix_write(mm.get(), g_out.c_str()), "writing " + g_out);
      return 0;
    }

    const auto seeds = parse_seeds(seeds_text);

    if (ev->parsed()) {
      Matrix a;
      if (!ev_in.empty()) {
        a = read_matrix(ev_in);
      } else {
        snla_matrix* m = nullptr;
        check(snla_gen_gaussian(ev_n, ev_d, 12345, &m), "generating A");
        a.reset(m);
      }
      auto metrics = for_each_seed(seeds, [&](std::uint64_t s) {
        double e = 0;
        check(snla_embed_verify(ev_kind.c_str(), ev_r, s, a.get(), &e), "embed-verify");
        return json{{"eps_obs", e}, {"ok", e <= ev_eps}};
      });
      const double frac = fraction(metrics, [](const json& m) { return m["ok"].get<bool>(); });
      json params{{"kind", ev_kind}, {"r", ev_r}, {"eps", ev_eps}, {"delta", ev_delta},
                  {"rows", snla_matrix_rows(a.get())}, {"cols", snla_matrix_cols(a.get())}};
      if (!ev_in.empty()) params["in"] = ev_in;
      return finish("embed-verify", params, seeds, metrics, {{"eps_obs", quantiles(metrics, "eps_obs")}, {"ok_fraction", frac}},
                    frac >= 1.0 - ev_delta, out);
    }

    if (l2->parsed()) {
      Matrix a = read_matrix(l2_in);
      const std::size_t n = snla_matrix_rows(a.get()), d = snla_matrix_cols(a.get());
      const auto b = read_vector(l2_b, n);
      std::vector<double> xopt(d);
      double opt = 0;
      check(snla_l2_exact(a.get(), b.data(), xopt.data()), "exact solve");
      check(snla_cost(a.get(), xopt.data(), b.data(), 2, &opt), "cost");
      auto metrics = for_each_seed(seeds, [&](std::uint64_t s) {
        std::vector<double> x(d);
        json m;
        if (l2_method == "sketch") {
          check(snla_l2_sketch(a.get(), b.data(), l2_eps, s, x.data()), "sketch solve");
        } else {
          std::size_t it = 0;
          double kappa = 0;
          check(snla_l2_precond(a.get(), b.data(), l2_eps, s, x.data(), &it, &kappa), "preconditioned solve");
          m["iterations"] = it;
          m["kappa"] = kappa;
        }
        double c = 0;
        check(snla_cost(a.get(), x.data(), b.data(), 2, &c), "cost");
        const double ratio = opt > 0 ? c / opt : (c == 0 ? 1.0 : INFINITY);
        m["cost"] = c;
        m["ratio"] = ratio;
        return m;
      });
      const double frac = fraction(metrics, [&](const json& m) { return m["ratio"].get<double>() <= 1 + l2_eps; });
      return finish("regress-l2", {{"in", l2_in}, {"b", l2_b}, {"eps", l2_eps}, {"method", l2_method}}, seeds, metrics,
                    {{"optimal_cost", opt}, {"ratio", quantiles(metrics, "ratio")}, {"ok_fraction", frac}}, frac >= 0.95,
                    out);
    }

    if (l1->parsed()) {
      Matrix a = read_matrix(l1_in);
      const std::size_t n = snla_matrix_rows(a.get()), d = snla_matrix_cols(a.get());
      const auto b = read_vector(l1_b, n);
      std::vector<double> xopt(d);
      double opt = 0;
      check(snla_l1_small(a.get(), b.data(), xopt.data(), &opt), "full l1 solve");
      const int emb = l1_emb == "cauchy" ? SNLA_L1_CAUCHY : SNLA_L1_EXPONENTIAL;
      auto metrics = for_each_seed(seeds, [&](std::uint64_t s) {
        std::vector<double> x(d);
        double c = 0;
        std::size_t rows = 0;
        check(snla_l1_sketched(a.get(), b.data(), l1_eps, emb, s, x.data(), &c, &rows), "sampled l1 solve");
        return json{{"cost", c}, {"ratio", opt > 0 ? c / opt : 1.0}, {"sampled_rows", rows}};
      });
      const double frac = fraction(metrics, [&](const json& m) { return m["ratio"].get<double>() <= 1 + l1_eps; });
      return finish("regress-l1", {{"in", l1_in}, {"b", l1_b}, {"eps", l1_eps}, {"embedding", l1_emb}}, seeds, metrics,
                    {{"optimal_cost", opt}, {"ratio", quantiles(metrics, "ratio")}, {"ok_fraction", frac}}, frac >= 0.9,
                    out);
    }

    if (lr->parsed()) {
      Matrix a = read_matrix(lr_in);
      const bool spectral = lr_method == "power";
      double tail = 0;
      check(snla_matrix_tail_norm(a.get(), lr_k, spectral ? 1 : 0, &tail), "SVD oracle");
      auto metrics = for_each_seed(seeds, [&](std::uint64_t s) {
        double err = 0;
        if (spectral) {
          snla_matrix* z = nullptr;
          check(snla_lowrank_power(a.get(), lr_k, lr_eps, s, &z), "power method");
          Matrix zz(z);
          check(snla_project_residual_norm(a.get(), zz.get(), 1, &err), "residual");
        } else {
          snla_matrix* ap = nullptr;
          check(snla_lowrank_frobenius(a.get(), lr_k, lr_eps, s, &ap), "low-rank");
          Matrix aa(ap);
          check(snla_matrix_residual_norm(a.get(), aa.get(), 0, &err), "residual");
        }
        return json{{"error", err}, {"ratio", tail > 0 ? err / tail : (err == 0 ? 1.0 : INFINITY)}};
      });
      const double need = spectral ? 0.8 : 0.9;
      const double frac = fraction(metrics, [&](const json& m) { return m["ratio"].get<double>() <= 1 + lr_eps; });
      return finish("lowrank", {{"in", lr_in}, {"k", lr_k}, {"eps", lr_eps}, {"method", lr_method}}, seeds, metrics,
                    {{"optimal_error", tail}, {"ratio", quantiles(metrics, "ratio")}, {"ok_fraction", frac}},
                    frac >= need, out);
    }

    if (cu->parsed()) {
      Matrix a = read_matrix(cu_in);
      double tail = 0;
      check(snla_matrix_tail_norm(a.get(), cu_k, 0, &tail), "SVD oracle");
      auto metrics = for_each_seed(seeds, [&](std::uint64_t s) {
        snla_cur* c = nullptr;
        check(snla_cur_decompose(a.get(), cu_k, cu_eps, s, &c), "cur");
        std::unique_ptr<snla_cur, void (*)(snla_cur*)> cc(c, snla_cur_free);
        snla_matrix* p = nullptr;
        check(snla_cur_product(cc.get(), &p), "cur product");
        Matrix pp(p);
        double err = 0;
        check(snla_matrix_residual_norm(a.get(), pp.get(), 0, &err), "residual");
        std::size_t ncols = 0, nrows = 0, rank = 0;
        check(snla_cur_indices(cc.get(), 0, nullptr, 0, &ncols), "cur columns");
        check(snla_cur_indices(cc.get(), 1, nullptr, 0, &nrows), "cur rows");
        check(snla_cur_rank_u(cc.get(), &rank), "rank(U)");
        return json{{"error", err}, {"ratio", tail > 0 ? err / tail : (err == 0 ? 1.0 : INFINITY)},
                    {"c", ncols}, {"r", nrows}, {"rank_u", rank}};
      });
      const double frac = fraction(metrics, [&](const json& m) { return m["ratio"].get<double>() <= 1 + cu_eps; });
      const double rank_ok = fraction(metrics, [&](const json& m) { return m["rank_u"].get<std::size_t>() == cu_k; });
      return finish("cur", {{"in", cu_in}, {"k", cu_k}, {"eps", cu_eps}}, seeds, metrics,
                    {{"optimal_error", tail}, {"ratio", quantiles(metrics, "ratio")}, {"c", quantiles(metrics, "c")},
                     {"r", quantiles(metrics, "r")}, {"ok_fraction", frac}, {"rank_ok_fraction", rank_ok}},
                    frac >= 0.8 && rank_ok == 1.0, out);
    }

    if (di->parsed()) {
      std::uint64_t gen_seed = 0;
      if (!di_scenario.empty()) {
        std::ifstream f(di_scenario);
        if (!f) throw Failure("cannot open " + di_scenario);
        json sc;
        try {
          sc = json::parse(f);
        } catch (const json::exception& e) {
          throw Failure("scenario " + di_scenario + ": " + e.what());
        }
        di_s = sc.value("s", di_s);
        di_n = sc.value("n", di_n);
        di_d = sc.value("d", di_d);
        di_k = sc.value("k", di_k);
        di_eps = sc.value("eps", sc.value("ε", di_eps));
        gen_seed = sc.value("seed", gen_seed);
        if (sc.contains("generator")) {
          di_rank = sc["generator"].value("planted_rank", di_rank);
          di_noise = sc["generator"].value("noise", di_noise);
        }
      }
      if (di_s < 1) throw Failure("distributed: s must be at least 1");
      Matrix a;
      if (!di_in.empty()) {
        a = read_matrix(di_in);
      } else {
        snla_matrix* m = nullptr;
        check(snla_gen_planted(di_n, di_d, di_rank, di_noise, gen_seed, &m), "generating A");
        a.reset(m);
      }
      const std::size_t n = snla_matrix_rows(a.get()), d = snla_matrix_cols(a.get());
      double tail = 0;
      check(snla_matrix_tail_norm(a.get(), di_k, 0, &tail), "SVD oracle");
      const double bound = 10.0 * (double(di_s) * double(d) * double(di_k) / di_eps +
                                   double(di_s) * double(di_k) * double(di_k) / std::pow(di_eps, 4));
      std::mutex ledger_mu;
      std::string first_ledger;
      auto metrics = for_each_seed(seeds, [&](std::uint64_t s) {
        // additive shares: Gaussian shares plus one balancing share
        std::vector<Matrix> shares;
        std::vector<double> rest = values(a.get());
        for (std::size_t t = 0; t + 1 < di_s; ++t) {
          snla_matrix* g = nullptr;
          check(snla_gen_gaussian(n, d, s * 1000003ULL + t, &g), "share");
          shares.emplace_back(g);
          const double* gd = snla_matrix_data(g);
          for (std::size_t i = 0; i < rest.size(); ++i) rest[i] -= gd[i];
        }
        shares.push_back(make_matrix(n, d, rest));
        std::vector<const snla_matrix*> ptrs;
        for (const auto& sh : shares) ptrs.push_back(sh.get());
        snla_protocol* p = nullptr;
        check(snla_distributed_run(ptrs.data(), ptrs.size(), di_k, di_eps, s, di_int ? 1 : 0, nullptr, nullptr, &p),
              "protocol");
        std::unique_ptr<snla_protocol, void (*)(snla_protocol*)> pp(p, snla_protocol_free);
        snla_matrix* c = nullptr;
        check(snla_protocol_combined(pp.get(), &c), "combined output");
        Matrix cc(c);
        double err = 0;
        check(snla_matrix_residual_norm(a.get(), cc.get(), 0, &err), "residual");
        int agree = 0;
        check(snla_protocol_consensus(pp.get(), &agree), "consensus");
        if (s == seeds.front()) {
          std::size_t need = 0;
          check(snla_protocol_ledger_csv(pp.get(), nullptr, 0, &need), "ledger");
          std::string buf(need, '\0');
          check(snla_protocol_ledger_csv(pp.get(), buf.data(), need, &need), "ledger");
          buf.resize(need - 1);
          std::lock_guard<std::mutex> lock(ledger_mu);
          first_ledger = buf;
        }
        const std::size_t words = snla_protocol_total_words(pp.get());
        return json{{"error", err}, {"ratio", tail > 0 ? err / tail : (err == 0 ? 1.0 : INFINITY)}, {"words", words},
                    {"consensus", agree == 1}};
      });
      if (!di_ledger.empty()) write_text(di_ledger, first_ledger);
      const double frac = fraction(metrics, [&](const json& m) { return m["ratio"].get<double>() <= 1 + di_eps; });
      const bool words_ok = std::all_of(metrics.begin(), metrics.end(),
                                        [&](const json& m) { return m["words"].get<double>() <= bound; });
      const bool agree = std::all_of(metrics.begin(), metrics.end(), [](const json& m) { return m["consensus"].get<bool>(); });
      return finish("distributed",
                    {{"s", di_s}, {"n", n}, {"d", d}, {"k", di_k}, {"eps", di_eps}, {"integer_safe", di_int},
                     {"generator", {{"planted_rank", di_rank}, {"noise", di_noise}, {"seed", gen_seed}}}},
                    seeds, metrics,
                    {{"optimal_error", tail}, {"ratio", quantiles(metrics, "ratio")}, {"ok_fraction", frac},
                     {"word_bound", bound}, {"expected_words", snla_protocol_expected_words(di_s, d, di_k, di_eps, di_int)}},
                    frac >= 0.8 && words_ok && agree, out);
    }

    if (sp->parsed()) {
      Graph g;
      std::string source;
      if (!sp_graph.empty()) {
        snla_graph* gg = nullptr;
        check(snla_graph_read(sp_graph.c_str(), &gg), "reading " + sp_graph);
        g.reset(gg);
        source = sp_graph;
      } else {
        if (sp_family.empty()) throw Failure("sparsify: give --graph or --family");
        snla_graph* gg = nullptr;
        check(sp_family == "complete" ? snla_graph_complete(sp_n, &gg) : snla_graph_gnp(sp_n, sp_p, 0, 0, &gg),
              "building graph");
        g.reset(gg);
        source = sp_family;
      }
      std::mutex mu;
      auto metrics = for_each_seed(seeds, [&](std::uint64_t s) {
        snla_graph* h = nullptr;
        double cert = 0;
        check(snla_sparsify(g.get(), sp_eps, s, &h, &cert), "sparsify");
        Graph hh(h);
        if (!sp_out.empty() && s == seeds.front()) {
          std::lock_guard<std::mutex> lock(mu);
          check(snla_graph_write(hh.get(), sp_out.c_str()), "writing " + sp_out);
        }
        return json{{"eps_certified", cert}, {"edges", snla_graph_edges(hh.get())}};
      });
      const double frac = fraction(metrics, [&](const json& m) { return m["eps_certified"].get<double>() <= sp_eps; });
      return finish("sparsify",
                    {{"graph", source}, {"n", snla_graph_vertices(g.get())}, {"m", snla_graph_edges(g.get())},
                     {"eps", sp_eps}},
                    seeds, metrics,
                    {{"eps_certified", quantiles(metrics, "eps_certified")}, {"edges", quantiles(metrics, "edges")},
                     {"ok_fraction", frac}},
                    frac >= 0.9, out);
    }

    if (sc->parsed()) {
      Matrix a = read_matrix(sc_in);
      double exact = 0;
      check(snla_schatten_exact(a.get(), sc_p, &exact), "exact Schatten norm");
      auto metrics = for_each_seed(seeds, [&](std::uint64_t s) {
        double est = 0;
        std::size_t passes = 0;
        check(snla_schatten_estimate(a.get(), sc_p, sc_eps, s, &est, &passes), "schatten");
        return json{{"estimate", est}, {"relative_error", std::abs(est - exact) / exact}, {"passes", passes}};
      });
      const double frac =
          fraction(metrics, [&](const json& m) { return m["relative_error"].get<double>() <= sc_eps; });
      return finish("schatten", {{"in", sc_in}, {"p", sc_p}, {"eps", sc_eps}}, seeds, metrics,
                    {{"exact", exact}, {"relative_error", quantiles(metrics, "relative_error")}, {"ok_fraction", frac}},
                    frac >= 0.9, out);
    }

    if (at->parsed()) {
      const std::size_t n = at_n ? at_n : 2 * at_k;
      const std::size_t expected = at_k * (at_k + 1) / 2 + (at_k + 1) + 1;
      auto metrics = for_each_seed(seeds, [&](std::uint64_t s) {
        snla_matrix* sm = nullptr;
        check(snla_gen_gaussian(at_k, n, s, &sm), "sketch");
        Matrix smm(sm);
        struct Ctx {
          const snla_matrix* s;
          std::vector<double> y;
        } ctx{smm.get(), std::vector<double>(at_k)};
        auto oracle = [](void* c, const double* x, std::size_t) {
          auto* cx = static_cast<Ctx*>(c);
          snla_matrix_apply(cx->s, x, cx->y.data());
          double q = 0;
          for (double v : cx->y) q += v * v;
          return q;
        };
        std::vector<double> v(n), sv(at_k);
        std::size_t queries = 0;
        check(snla_jl_attack(oracle, &ctx, at_k, n, v.data(), &queries), "attack");
        check(snla_matrix_apply(smm.get(), v.data(), sv.data()), "apply");
        double nsv = 0, nv = 0, fro = 0;
        for (double x : sv) nsv += x * x;
        for (double x : v) nv += x * x;
        for (double x : values(smm.get())) fro += x * x;
        const double ratio = std::sqrt(nsv) / (std::sqrt(nv) * std::sqrt(fro));
        return json{{"ratio", ratio}, {"queries", queries}};
      });
      const bool ok = std::all_of(metrics.begin(), metrics.end(), [&](const json& m) {
        return m["ratio"].get<double>() <= 1e-8 && m["queries"].get<std::size_t>() == expected;
      });
      return finish("attack-jl", {{"k", at_k}, {"n", n}}, seeds, metrics,
                    {{"ratio", quantiles(metrics, "ratio")}, {"expected_queries", expected}}, ok, out);
    }
  } catch (const Failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
