#include "snla/mmio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace snla {

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& msg) {
  fail(ErrorCode::Parse, "line " + std::to_string(line) + ": " + msg);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

AnyMatrix mm_parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) parse_error(1, "empty file");
  ++lineno;
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket") parse_error(lineno, "missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") parse_error(lineno, "banner object must be 'matrix'");
  if (format != "coordinate" && format != "array") parse_error(lineno, "unknown format '" + format + "'");
  if (field != "real" && field != "integer") parse_error(lineno, "only real matrices are supported");
  if (symmetry != "general") parse_error(lineno, "only general symmetry is supported");

  auto next_data_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++lineno;
      const auto p = out.find_first_not_of(" \t\r");
      if (p == std::string::npos || out[p] == '%') continue;
      return true;
    }
    return false;
  };

  if (!next_data_line(line)) parse_error(lineno, "missing size line");
  std::istringstream sz(line);
  long long rows = -1, cols = -1, nnz = -1;
  if (format == "coordinate") {
    if (!(sz >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) parse_error(lineno, "bad size line");
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(nnz));
    for (long long e = 0; e < nnz; ++e) {
      if (!next_data_line(line)) parse_error(lineno, "expected " + std::to_string(nnz) + " entries, found " + std::to_string(e));
      std::istringstream es(line);
      long long i, j;
      double v;
      if (!(es >> i >> j >> v)) parse_error(lineno, "malformed entry");
      if (i < 1 || i > rows || j < 1 || j > cols) parse_error(lineno, "index out of bounds");
      if (!std::isfinite(v)) parse_error(lineno, "non-finite value");
      t.push_back({static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1), v});
    }
    if (next_data_line(line)) parse_error(lineno, "trailing data after declared entries");
    return SparseMatrix::from_triplets(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::move(t));
  }
  if (!(sz >> rows >> cols) || rows < 0 || cols < 0) parse_error(lineno, "bad size line");
  DenseMatrix d(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
  for (long long j = 0; j < cols; ++j)
    for (long long i = 0; i < rows; ++i) {
      if (!next_data_line(line)) parse_error(lineno, "too few array values");
      std::istringstream es(line);
      double v;
      if (!(es >> v)) parse_error(lineno, "malformed value");
      if (!std::isfinite(v)) parse_error(lineno, "non-finite value");
      d(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = v;
    }
  if (next_data_line(line)) parse_error(lineno, "trailing data after array values");
  return d;
}

AnyMatrix mm_read(const std::string& path) { return mm_parse(read_file(path)); }

DenseMatrix mm_read_dense(const std::string& path) {
  AnyMatrix m = mm_read(path);
  if (auto* s = std::get_if<SparseMatrix>(&m)) return s->to_dense();
  return std::get<DenseMatrix>(std::move(m));
}

std::string mm_format(const SparseMatrix& a) {
  std::string out = "%%MatrixMarket matrix coordinate real general\n";
  out += std::to_string(a.rows()) + " " + std::to_string(a.cols()) + " " + std::to_string(a.nnz()) + "\n";
  for (const auto& t : a.triplets())
    out += std::to_string(t.row + 1) + " " + std::to_string(t.col + 1) + " " + fmt_double(t.value) + "\n";
  return out;
}

std::string mm_format(const DenseMatrix& a) {
  std::string out = "%%MatrixMarket matrix array real general\n";
  out += std::to_string(a.rows()) + " " + std::to_string(a.cols()) + "\n";
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) out += fmt_double(a(i, j)) + "\n";
  return out;
}

void mm_write(const SparseMatrix& a, const std::string& path) { write_file_atomic(path, mm_format(a)); }
void mm_write(const DenseMatrix& a, const std::string& path) { write_file_atomic(path, mm_format(a)); }

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(bool(out), ErrorCode::Io, "cannot write " + tmp);
    out << contents;
    out.flush();
    require(bool(out), ErrorCode::Io, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorCode::Io, "rename " + tmp + " -> " + path + ": " + ec.message());
}

}  // namespace snla
