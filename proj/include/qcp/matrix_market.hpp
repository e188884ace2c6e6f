#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qcp/sparse.hpp"

namespace qcp {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

/// Matrix Market coordinate/complex/general export.  Entries are written
/// in (row, col) order with 17 significant digits, which round-trips
/// doubles bit-exactly through read_matrix_market.
inline void write_matrix_market(std::ostream& os, const SparseOperator& a) {
  os << "%%MatrixMarket matrix coordinate complex general\n";
  os << a.dim() << " " << a.dim() << " " << a.nnz() << "\n";
  for (const auto& [rc, v] : a.entries())
    os << rc.first + 1 << " " << rc.second + 1 << " " << detail::fmt17(v.real())
       << " " << detail::fmt17(v.imag()) << "\n";
  if (!os) throw IoError("matrix market write failed");
}

inline void write_matrix_market(const std::string& path, const SparseOperator& a) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  write_matrix_market(f, a);
}

inline SparseOperator read_matrix_market(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty matrix market stream");
  {
    std::istringstream hs(line);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || object != "matrix" ||
        format != "coordinate" || field != "complex" || symmetry != "general")
      throw IoError("unsupported matrix market header: " + line);
  }
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::size_t rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream ds(line);
    if (!(ds >> rows >> cols >> nnz)) throw IoError("bad size line: " + line);
  }
  if (rows != cols) throw IoError("operator files must be square");
  SparseOperator a(rows);
  for (std::size_t k = 0; k < nnz; ++k) {
    if (!std::getline(is, line)) throw IoError("truncated entry list");
    std::istringstream es(line);
    std::size_t r = 0, c = 0;
    double re = 0.0, im = 0.0;
    if (!(es >> r >> c >> re >> im)) throw IoError("bad entry line: " + line);
    if (r < 1 || r > rows || c < 1 || c > cols)
      throw IoError("entry index out of range: " + line);
    if (a.at(r - 1, c - 1) != 0.0) throw IoError("duplicate entry: " + line);
    a.set(r - 1, c - 1, Complex(re, im));
  }
  return a;
}

inline SparseOperator read_matrix_market(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open for reading: " + path);
  return read_matrix_market(f);
}

}  // namespace qcp
