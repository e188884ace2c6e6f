#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcp/rng.hpp"

namespace qcp {

using Complex = std::complex<double>;

/// Square sparse matrix over an enumerated finite basis.  Exact sparse
/// arithmetic in floating complex; zero entries are never stored, so
/// structural sparsity is meaningful (a diagonal operator has no
/// off-diagonal entries at all, not merely small ones).
class SparseOperator {
 public:
  using Key = std::pair<std::size_t, std::size_t>;  // (row, col)

  explicit SparseOperator(std::size_t dim) : dim_(dim) {}

  static SparseOperator identity(std::size_t dim) {
    SparseOperator a(dim);
    for (std::size_t i = 0; i < dim; ++i) a.entries_[{i, i}] = 1.0;
    return a;
  }

  static SparseOperator diagonal(std::span<const Complex> values) {
    SparseOperator a(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] != 0.0) a.entries_[{i, i}] = values[i];
    return a;
  }

  static SparseOperator diagonal(std::span<const double> values) {
    SparseOperator a(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] != 0.0) a.entries_[{i, i}] = values[i];
    return a;
  }

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return entries_.size(); }
  const std::map<Key, Complex>& entries() const { return entries_; }

  Complex at(std::size_t r, std::size_t c) const {
    auto it = entries_.find({r, c});
    return it == entries_.end() ? Complex(0.0) : it->second;
  }

  void set(std::size_t r, std::size_t c, Complex v) {
    check_index(r, c);
    if (v == 0.0)
      entries_.erase({r, c});
    else
      entries_[{r, c}] = v;
  }

  void add_to(std::size_t r, std::size_t c, Complex v) {
    check_index(r, c);
    auto [it, inserted] = entries_.try_emplace({r, c}, v);
    if (!inserted) {
      it->second += v;
      if (it->second == 0.0) entries_.erase(it);
    }
  }

  SparseOperator adjoint() const {
    SparseOperator a(dim_);
    for (const auto& [rc, v] : entries_)
      a.entries_[{rc.second, rc.first}] = std::conj(v);
    return a;
  }

  friend SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
    a.check_dim(b);
    SparseOperator r = a;
    for (const auto& [rc, v] : b.entries_) r.add_to(rc.first, rc.second, v);
    return r;
  }

  friend SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) {
    a.check_dim(b);
    SparseOperator r = a;
    for (const auto& [rc, v] : b.entries_) r.add_to(rc.first, rc.second, -v);
    return r;
  }

  SparseOperator scaled(Complex s) const {
    SparseOperator r(dim_);
    if (s == 0.0) return r;
    for (const auto& [rc, v] : entries_) r.entries_[rc] = s * v;
    return r;
  }

  /// Composition (a then applied after b): (a*b) x = a(b x).
  friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
    a.check_dim(b);
    // group b's entries by row so each a-entry (r,k) meets b-entries (k,c)
    SparseOperator r(a.dim_);
    auto it = b.entries_.begin();
    std::vector<std::pair<std::size_t, std::vector<std::pair<std::size_t, Complex>>>> rows;
    while (it != b.entries_.end()) {
      const std::size_t row = it->first.first;
      std::vector<std::pair<std::size_t, Complex>> cols;
      while (it != b.entries_.end() && it->first.first == row) {
        cols.emplace_back(it->first.second, it->second);
        ++it;
      }
      rows.emplace_back(row, std::move(cols));
    }
    const auto row_of = [&](std::size_t k)
        -> const std::vector<std::pair<std::size_t, Complex>>* {
      auto pos = std::lower_bound(rows.begin(), rows.end(), k,
                                  [](const auto& p, std::size_t key) { return p.first < key; });
      if (pos == rows.end() || pos->first != k) return nullptr;
      return &pos->second;
    };
    for (const auto& [rc, va] : a.entries_) {
      const auto* cols = row_of(rc.second);
      if (!cols) continue;
      for (const auto& [c, vb] : *cols) r.add_to(rc.first, c, va * vb);
    }
    return r;
  }

  std::vector<Complex> apply(std::span<const Complex> x) const {
    if (x.size() != dim_) throw std::invalid_argument("vector dimension mismatch");
    std::vector<Complex> y(dim_, Complex(0.0));
    for (const auto& [rc, v] : entries_) y[rc.first] += v * x[rc.second];
    return y;
  }

  std::vector<Complex> apply_adjoint(std::span<const Complex> x) const {
    if (x.size() != dim_) throw std::invalid_argument("vector dimension mismatch");
    std::vector<Complex> y(dim_, Complex(0.0));
    for (const auto& [rc, v] : entries_) y[rc.second] += std::conj(v) * x[rc.first];
    return y;
  }

  bool is_diagonal() const {
    for (const auto& [rc, v] : entries_)
      if (rc.first != rc.second) return false;
    return true;
  }

  std::vector<Complex> diagonal_values() const {
    std::vector<Complex> d(dim_, Complex(0.0));
    for (const auto& [rc, v] : entries_)
      if (rc.first == rc.second) d[rc.first] = v;
    return d;
  }

  /// Max-norm over entries of this operator.
  double max_abs() const {
    double m = 0.0;
    for (const auto& [rc, v] : entries_) m = std::max(m, std::abs(v));
    return m;
  }

  /// ||A - A*||_max
  double hermitian_defect() const {
    double m = 0.0;
    for (const auto& [rc, v] : entries_)
      m = std::max(m, std::abs(v - std::conj(at(rc.second, rc.first))));
    return m;
  }

  /// Entrywise absolute values (used for magnitude/conditioning scales).
  SparseOperator abs_entries() const {
    SparseOperator r(dim_);
    for (const auto& [rc, v] : entries_) r.entries_[rc] = std::abs(v);
    return r;
  }

  static SparseOperator block_diag(std::span<const SparseOperator> blocks) {
    std::size_t dim = 0;
    for (const auto& b : blocks) dim += b.dim();
    SparseOperator r(dim);
    std::size_t off = 0;
    for (const auto& b : blocks) {
      for (const auto& [rc, v] : b.entries_)
        r.entries_[{rc.first + off, rc.second + off}] = v;
      off += b.dim();
    }
    return r;
  }

  bool operator==(const SparseOperator& o) const {
    return dim_ == o.dim_ && entries_ == o.entries_;
  }

 private:
  void check_index(std::size_t r, std::size_t c) const {
    if (r >= dim_ || c >= dim_) throw std::out_of_range("entry index out of range");
  }
  void check_dim(const SparseOperator& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("operator dimension mismatch");
  }

  std::size_t dim_;
  std::map<Key, Complex> entries_;
};

/// Largest entrywise deviation |a_ij - b_ij| / max(1, |a_ij|, |b_ij|):
/// relative where entries are large, absolute below scale 1.
inline double relative_entry_diff(const SparseOperator& a, const SparseOperator& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
  double m = 0.0;
  const auto scan = [&](const SparseOperator& x, const SparseOperator& y) {
    for (const auto& [rc, v] : x.entries()) {
      const Complex w = y.at(rc.first, rc.second);
      m = std::max(m, std::abs(v - w) /
                          std::max({1.0, std::abs(v), std::abs(w)}));
    }
  };
  scan(a, b);
  scan(b, a);
  return m;
}

/// Apply a scalar function to a diagonal operator.
template <typename F>
SparseOperator map_diagonal(const SparseOperator& a, F&& f) {
  if (!a.is_diagonal()) throw std::invalid_argument("operator is not diagonal");
  std::vector<Complex> d = a.diagonal_values();
  for (Complex& v : d) v = f(v);
  return SparseOperator::diagonal(std::span<const Complex>(d));
}

/// Eigenvalues of a Hermitian operator, ascending.  Exactly diagonal
/// operators are read off directly at any dimension; otherwise a dense
/// solver is used up to dimension 512 (larger non-diagonal spectra are out
/// of scope for this kernel; use operator_norm_lb for extremal information).
inline std::vector<double> hermitian_spectrum(const SparseOperator& a) {
  if (a.hermitian_defect() >= 1e-12)
    throw std::invalid_argument("operator is not Hermitian");
  std::vector<double> ev;
  if (a.is_diagonal()) {
    for (const Complex& v : a.diagonal_values()) ev.push_back(v.real());
    std::sort(ev.begin(), ev.end());
    return ev;
  }
  if (a.dim() > 512)
    throw std::length_error("dense spectrum limited to dim <= 512");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(a.dim(), a.dim());
  for (const auto& [rc, v] : a.entries()) m(rc.first, rc.second) = v;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigensolver failed to converge");
  ev.assign(solver.eigenvalues().data(),
            solver.eigenvalues().data() + solver.eigenvalues().size());
  return ev;
}

/// Power-iteration core with caller-provided start vector (used for
/// warm-started truncation sweeps).  v is updated in place.
inline double power_iterate(const SparseOperator& a,
                            std::vector<Complex>& v, int iterations) {
  const auto norm = [](std::span<const Complex> x) {
    double s = 0.0;
    for (const Complex& c : x) s += std::norm(c);
    return std::sqrt(s);
  };
  double nv = norm(v);
  if (nv == 0.0) return 0.0;
  for (Complex& c : v) c /= nv;
  double best = 0.0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<Complex> w = a.apply(v);
    const double nw = norm(w);  // = sqrt(Rayleigh of A*A) at unit v
    best = std::max(best, nw);
    if (nw == 0.0) break;
    std::vector<Complex> u = a.apply_adjoint(w);
    const double nu = norm(u);
    if (nu == 0.0) break;
    for (std::size_t i = 0; i < u.size(); ++i) v[i] = u[i] / nu;
  }
  return best;
}

/// Largest-singular-value lower bound by power iteration on A*A from a
/// seeded random start.  Returns the running maximum of sqrt(Rayleigh
/// quotient), so the value is non-decreasing in the iteration count and
/// converges to sigma_max.  Deterministic for a fixed seed.
inline double operator_norm_lb(const SparseOperator& a, int iterations,
                               std::uint64_t seed = 0xc0ffee123ULL) {
  if (a.dim() == 0) throw std::invalid_argument("zero-dimensional operator");
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  DetRng rng(seed);
  std::vector<Complex> v(a.dim());
  for (Complex& x : v) x = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  return power_iterate(a, v, iterations);
}

}  // namespace qcp
