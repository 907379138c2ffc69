#pragma once

#include <string>
#include <variant>

#include "snla/matrix.hpp"

namespace snla {

using AnyMatrix = std::variant<SparseMatrix, DenseMatrix>;

// Coordinate files give a SparseMatrix (duplicates summed), array files a DenseMatrix.
AnyMatrix mm_read(const std::string& path);
AnyMatrix mm_parse(const std::string& text);
DenseMatrix mm_read_dense(const std::string& path);

void mm_write(const SparseMatrix& a, const std::string& path);
void mm_write(const DenseMatrix& a, const std::string& path);
std::string mm_format(const SparseMatrix& a);
std::string mm_format(const DenseMatrix& a);

// temp file + rename
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace snla
