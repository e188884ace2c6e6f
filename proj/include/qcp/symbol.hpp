#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "qcp/funcexpr.hpp"

namespace qcp {

/// Finite sum of g_m(t_1..t_n) S_1^{#m_1}...S_n^{#m_n} over the top-
/// component lattice, in normal form: at most one coefficient function per
/// shift multi-index, every function to the left of every shift.
///
/// Reduction rules (coordinate n is the unitary one):
///   shifts commute past functions by the coordinate scaling sigma,
///   S_j* S_j = 1 exactly for every j,
///   S_j S_j* = 1 - chi_{q^{-1}}(t_j) for j < n, expanded recursively with
///   the defect indicator transported to the left.
class CrossedSymbol {
 public:
  explicit CrossedSymbol(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("dimension must be >= 1");
  }

  static CrossedSymbol function(int n, FunctionExpr f) {
    CrossedSymbol s(n);
    if (f.max_axis() > n) throw std::invalid_argument("function exceeds dimension");
    s.terms_.emplace(std::vector<int>(n, 0), std::move(f));
    return s;
  }

  static CrossedSymbol constant(int n, double c) {
    return function(n, FunctionExpr::constant(c));
  }

  /// S_axis^{#power} (adjoint power for negative exponents).
  static CrossedSymbol shift(int n, int axis, int power) {
    CrossedSymbol s(n);
    if (axis < 1 || axis > n) throw std::invalid_argument("axis out of range");
    std::vector<int> m(n, 0);
    m[axis - 1] = power;
    s.terms_.emplace(std::move(m), FunctionExpr::constant(1.0));
    return s;
  }

  int n() const { return n_; }
  const std::map<std::vector<int>, FunctionExpr>& terms() const { return terms_; }

  void add_term(const std::vector<int>& m, const FunctionExpr& g) {
    if (static_cast<int>(m.size()) != n_)
      throw std::invalid_argument("multi-index size mismatch");
    auto [it, inserted] = terms_.try_emplace(m, g);
    if (!inserted) it->second = it->second + g;
  }

  friend CrossedSymbol operator+(CrossedSymbol a, const CrossedSymbol& b) {
    a.check(b);
    for (const auto& [m, g] : b.terms_) a.add_term(m, g);
    return a;
  }

  /// Adjoint: (g S^{#m})* = sigma^{-m}(g) S^{#-m} (coefficients are real).
  CrossedSymbol star() const {
    CrossedSymbol r(n_);
    for (const auto& [m, g] : terms_) {
      std::vector<int> neg(m.size());
      for (std::size_t j = 0; j < m.size(); ++j) neg[j] = -m[j];
      r.add_term(neg, g.scaled(std::span<const int>(neg)));
    }
    return r;
  }

  friend CrossedSymbol symbol_multiply(const CrossedSymbol& x, const CrossedSymbol& y) {
    x.check(y);
    const int n = x.n_;
    CrossedSymbol out(n);
    for (const auto& [l, f] : x.terms_)
      for (const auto& [m, g] : y.terms_) {
        // f S^{#l} g S^{#m} = f sigma^l(g) S^{#l} S^{#m}
        FunctionExpr coeff = f * g.scaled(std::span<const int>(l));
        std::vector<int> total(n);
        for (int j = 1; j <= n; ++j) {
          const int lj = l[j - 1], mj = m[j - 1];
          total[j - 1] = lj + mj;
          if (j == n) continue;  // S_n is unitary: powers just add
          if (lj > 0 && mj < 0) {
            // S^a S^{*b} = prod_{r=a-c+1}^{a} (1 - chi_{q^{-r}}(t_j)) S^{#(a-b)}
            const int a = lj, b = -mj, c = std::min(a, b);
            for (int rr = a - c + 1; rr <= a; ++rr)
              coeff = coeff * (FunctionExpr::constant(1.0) -
                               FunctionExpr::point_mass(j, rr));
          }
          // lj < 0 < mj cancels exactly through S_j* S_j = 1
          // Canonical form carries the range indicator of the shift part:
          // a coefficient is only determined on range(S^{#m_j}) = the tail
          // {q^{-i} : i >= 1 + m_j}, and chi S^{m} = S^{m} chi-transported
          // identities would otherwise leave equal operators with unequal
          // formal coefficients.
          if (total[j - 1] > 0)
            coeff = coeff * FunctionExpr::tail_lattice(j, 1 + total[j - 1]);
        }
        out.add_term(total, coeff);
      }
    return out;
  }

 private:
  void check(const CrossedSymbol& o) const {
    if (n_ != o.n_) throw std::invalid_argument("mixed dimensions");
  }

  int n_;
  std::map<std::vector<int>, FunctionExpr> terms_;
};

}  // namespace qcp
