#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qcp/funcexpr.hpp"
#include "qcp/rep.hpp"
#include "qcp/symbol.hpp"

namespace qcp {

/// Generator f(|z_1|,..,|z_n|) S_1^{#l_1}..S_n^{#l_n} of the function
/// algebra.  `starred` marks the operator adjoint of the unstarred
/// generator (the generator set itself is not *-closed; the adjoint is
/// represented by composing the factor adjoints in reverse order).
struct GeneratorTerm {
  FunctionExpr f;
  std::vector<int> shift;  // l in Z^n
  bool starred = false;

  GeneratorTerm star() const { return {f, shift, !starred}; }
};

class TermRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace cdetail {

inline std::vector<double> vanishing_grid(double q) {
  std::vector<double> v;
  v.push_back(0.0);
  for (int e = -31; e <= 31; ++e) v.push_back(std::pow(q, e));
  return v;  // 64 values
}

}  // namespace cdetail

/// Sampled enforcement of the vanishing condition: for every j with
/// l_j != 0, f must vanish on {r_j = 0} x (grid over the remaining
/// coordinates) plus any caller-provided lattice values.  A violation at
/// any check point rejects the term deterministically.  This is a sampled
/// check, not a proof.
inline void enforce_vanishing(const GeneratorTerm& term, int n, double q,
                              std::span<const double> lattice_values = {}) {
  if (static_cast<int>(term.shift.size()) != n)
    throw std::invalid_argument("shift multi-index size mismatch");
  if (term.f.max_axis() > n)
    throw std::invalid_argument("function references coordinates beyond n");
  const std::vector<double> grid = cdetail::vanishing_grid(q);
  std::vector<double> point(n, 0.0);
  for (int j = 1; j <= n; ++j) {
    if (term.shift[j - 1] == 0) continue;
    // odometer over the other coordinates
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
      for (int m = 1; m <= n; ++m)
        point[m - 1] = (m == j) ? 0.0 : grid[idx[m - 1]];
      if (std::abs(term.f.eval(point, q)) > 1e-12)
        throw TermRejected("vanishing condition fails at r" + std::to_string(j) +
                           "=0 (l_" + std::to_string(j) + " != 0)");
      int pos = n - 1;
      while (pos >= 0) {
        if (pos == j - 1) {
          --pos;
          continue;
        }
        if (++idx[pos] < grid.size()) break;
        idx[pos] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
    for (double v : lattice_values) {
      for (int m = 1; m <= n; ++m) point[m - 1] = (m == j) ? 0.0 : v;
      if (std::abs(term.f.eval(point, q)) > 1e-12)
        throw TermRejected("vanishing condition fails at a lattice point");
    }
  }
}

/// Spot-check of C0 decay at large radius (up to q^{-(window+4)}).  Not a
/// proof; flags functions like f = 1 that clearly fail to vanish at
/// infinity.  Enforced by norm_estimate, not by the representations.
inline bool c0_spot_check(const GeneratorTerm& term, int n, double q, int window,
                          std::string* reason = nullptr) {
  std::vector<double> point(n, 0.0);
  double peak = 0.0;
  for (int e = -window; e <= window; ++e) {
    std::fill(point.begin(), point.end(), std::pow(q, e));
    peak = std::max(peak, std::abs(term.f.eval(point, q)));
  }
  std::fill(point.begin(), point.end(), 0.0);
  peak = std::max(peak, std::abs(term.f.eval(point, q)));
  const double near[] = {0.0, 1.0, std::pow(q, -1)};
  for (int j = 1; j <= n; ++j)
    for (int p = 2; p <= 4; ++p) {
      const double far = std::pow(q, -(window + p));
      for (double other : near) {
        std::fill(point.begin(), point.end(), other);
        point[j - 1] = far;
        const double v = std::abs(term.f.eval(point, q));
        if (v > 1e-2 * (1.0 + peak)) {
          if (reason)
            *reason = "no decay at r" + std::to_string(j) + " = q^-" +
                      std::to_string(window + p) + " (|f| = " + std::to_string(v) + ")";
          return false;
        }
      }
    }
  return true;
}

/// Composite shift Pi_j pi(S_j)^{#l_j} on a component; the zero operator
/// when some l_j != 0 beyond the component (pi_k(S_j) = 0 for j > k).
inline SparseOperator shift_power(const RepComponent& rep, std::span<const int> l) {
  for (int j = rep.component() + 1; j <= rep.n(); ++j)
    if (l[j - 1] != 0) return SparseOperator(rep.dim());
  SparseOperator acc = SparseOperator::identity(rep.dim());
  for (int j = 1; j <= rep.component(); ++j) {
    const int p = l[j - 1];
    if (p == 0) continue;
    const SparseOperator factor = p > 0 ? rep.shift(j) : rep.shift(j).adjoint();
    for (int i = 0; i < std::abs(p); ++i) acc = factor * acc;
  }
  return acc;
}

/// Multiplication operator pi_k(f): f evaluated at
///   (chi_{I_q}(t_1) sqrt(t_1^2-1) t_2..t_k, ..., t_{k-1}-part, t_k, 0..0)
/// at every lattice atom; the scalar f(0,..,0) for k = 0.
inline SparseOperator pi_multiplication(const FunctionExpr& f, const RepComponent& rep) {
  const int n = rep.n(), k = rep.component();
  std::vector<Complex> diag(rep.dim());
  std::vector<double> args(n, 0.0);
  for (std::size_t ord = 0; ord < rep.dim(); ++ord) {
    const std::vector<double> t = rep.atom(ord);
    std::fill(args.begin(), args.end(), 0.0);
    if (k >= 1) {
      args[k - 1] = t[k - 1];
      double tail = t[k - 1];
      for (int m = k - 1; m >= 1; --m) {
        // running product t_{m+1}..t_k, built from the right
        args[m - 1] = std::sqrt(t[m - 1] * t[m - 1] - 1.0) * tail;
        tail *= t[m - 1];
      }
    }
    diag[ord] = f.eval(args, rep.q());
  }
  return SparseOperator::diagonal(std::span<const Complex>(diag));
}

/// pi_k of a generator term.  Rejects terms violating the vanishing
/// condition (checked on the grid plus this component's atom values).
inline SparseOperator pi_k(const GeneratorTerm& term, const RepComponent& rep) {
  std::vector<double> lattice_values;
  for (double a : rep.fibers())
    for (int i = -rep.truncation().bilateral_max; i <= rep.truncation().bilateral_max; ++i)
      lattice_values.push_back(a * std::pow(rep.q(), -i));
  enforce_vanishing(term, rep.n(), rep.q(), lattice_values);
  const SparseOperator mult = pi_multiplication(term.f, rep);
  const SparseOperator shifts = shift_power(rep, term.shift);
  if (!term.starred) return mult * shifts;
  // adjoint generator: reverse order, per-factor adjoints
  std::vector<int> neg(term.shift.size());
  for (std::size_t j = 0; j < neg.size(); ++j) neg[j] = -term.shift[j];
  return shift_power(rep, neg) * mult;
}

/// The family pi_0 .. pi_n at one truncation.
struct ComponentFamily {
  std::vector<RepComponent> blocks;  // index k = 0..n

  static ComponentFamily build(const TruncationSpec& t, const FiberSpectrum& f) {
    ComponentFamily fam;
    for (int k = 0; k <= t.n; ++k)
      fam.blocks.push_back(build_component_abstract(k, t, f));
    return fam;
  }

  int n() const { return blocks.front().n(); }
  double q() const { return blocks.front().q(); }
};

/// (pi_0 + ... + pi_n) of a sum of generator terms, block diagonal over
/// the concatenated component bases.
inline SparseOperator represent(std::span<const GeneratorTerm> terms,
                                const ComponentFamily& family) {
  std::vector<SparseOperator> blocks;
  for (const RepComponent& rep : family.blocks) {
    SparseOperator acc(rep.dim());
    for (const GeneratorTerm& t : terms) acc = acc + pi_k(t, rep);
    blocks.push_back(std::move(acc));
  }
  return SparseOperator::block_diag(blocks);
}

/// pi of a crossed symbol on one component (the calculus is scoped to the
/// top component k = n; other components are accepted for the documented
/// non-multiplicativity probe).
inline SparseOperator pi_symbol(const CrossedSymbol& sym, const RepComponent& rep) {
  if (sym.n() != rep.n()) throw std::invalid_argument("dimension mismatch");
  SparseOperator acc(rep.dim());
  for (const auto& [m, g] : sym.terms()) {
    std::vector<Complex> diag(rep.dim());
    for (std::size_t ord = 0; ord < rep.dim(); ++ord)
      diag[ord] = g.eval(rep.atom(ord), rep.q());
    acc = acc + SparseOperator::diagonal(std::span<const Complex>(diag)) *
                    shift_power(rep, m);
  }
  return acc;
}

/// || pi(symbol_multiply(x,y)) - pi(x) pi(y) ||_max over interior rows.
inline double symbol_vs_matrix(const CrossedSymbol& x, const CrossedSymbol& y,
                               const RepComponent& rep) {
  const SparseOperator lhs = pi_symbol(symbol_multiply(x, y), rep);
  const SparseOperator rhs = pi_symbol(x, rep) * pi_symbol(y, rep);
  const SparseOperator diff = lhs - rhs;
  double m = 0.0;
  for (const auto& [rc, v] : diff.entries())
    if (rep.interior(rc.first)) m = std::max(m, std::abs(v));
  return m;
}

/// One row of the truncation sweep: certified lower bounds per component
/// block and their sup.  Lower-bound semantics only; no extrapolation to
/// the untruncated norm is claimed.
struct NormEstimate {
  std::size_t term_id = 0;
  int sweep_index = 0;
  int window = 0;  // N = M label of the truncation
  std::vector<double> block_lb;
  double sup_lb = 0.0;
};

/// Norm lower bounds for each term across a sweep of truncations (sorted
/// by increasing size).  Exactly diagonal blocks (pure multiplication
/// generators) report the lattice max of |f|; other blocks run power
/// iteration warm-started from the previous truncation's vector embedded
/// in the larger basis, which makes each column non-decreasing along the
/// sweep while every value remains a true Rayleigh-quotient lower bound.
inline std::vector<NormEstimate> norm_estimate(std::span<const GeneratorTerm> terms,
                                               const FiberSpectrum& fibers,
                                               std::span<const TruncationSpec> sweep,
                                               int iterations = 400,
                                               std::uint64_t seed = 0x5eed5eedULL) {
  if (sweep.empty()) return {};
  const int n = sweep.front().n;
  for (const auto& t : sweep)
    if (t.n != n) throw std::invalid_argument("sweep must share one dimension");
  for (std::size_t i = 1; i < sweep.size(); ++i)
    if (sweep[i].unilateral_max < sweep[i - 1].unilateral_max ||
        sweep[i].bilateral_max < sweep[i - 1].bilateral_max)
      throw std::invalid_argument("sweep must be sorted by increasing size");
  for (const GeneratorTerm& t : terms) {
    std::string why;
    if (!c0_spot_check(t, n, sweep.front().q, sweep.back().bilateral_max, &why))
      throw TermRejected("term fails the C0 decay spot-check: " + why);
  }

  std::vector<NormEstimate> rows;
  std::vector<std::vector<std::vector<Complex>>> warm(
      terms.size(), std::vector<std::vector<Complex>>(n + 1));
  // A smaller window is a compression of the larger one, so a certified
  // lower bound carries forward along the sweep.
  std::vector<std::vector<double>> carried(terms.size(),
                                           std::vector<double>(n + 1, 0.0));
  std::vector<RepComponent> prev_blocks;
  for (std::size_t step = 0; step < sweep.size(); ++step) {
    ComponentFamily fam = ComponentFamily::build(sweep[step], fibers);
    for (std::size_t ti = 0; ti < terms.size(); ++ti) {
      NormEstimate row;
      row.term_id = ti;
      row.sweep_index = static_cast<int>(step);
      row.window = sweep[step].unilateral_max;
      for (int k = 0; k <= n; ++k) {
        const RepComponent& rep = fam.blocks[k];
        const SparseOperator op = pi_k(terms[ti], rep);
        double lb = 0.0;
        if (op.is_diagonal()) {
          for (const Complex& v : op.diagonal_values())
            lb = std::max(lb, std::abs(v));
        } else {
          std::vector<Complex> v(rep.dim(), Complex(0.0));
          if (step == 0 || warm[ti][k].empty()) {
            DetRng rng(seed ^ (ti * 131 + k));
            for (Complex& x : v)
              x = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
          } else {
            const RepComponent& old = prev_blocks[k];
            for (std::size_t o = 0; o < old.dim(); ++o) {
              const BasisIndex& b = old.basis(o);
              const auto no = rep.ordinal(b.fiber, b.levels);
              if (no) v[*no] = warm[ti][k][o];
            }
          }
          lb = power_iterate(op, v, iterations);
          warm[ti][k] = std::move(v);
        }
        lb = std::max(lb, carried[ti][k]);
        carried[ti][k] = lb;
        row.block_lb.push_back(lb);
        row.sup_lb = std::max(row.sup_lb, lb);
      }
      rows.push_back(std::move(row));
    }
    prev_blocks = std::move(fam.blocks);
  }
  return rows;
}

/// Fixed 12-term separating family used by the separation checks and the
/// CLI default: radial decay D = exp(-(r_1+..+r_n)) against coordinate
/// monomials, with winding indices covering every coordinate.  Every term
/// satisfies the vanishing condition.
inline std::vector<GeneratorTerm> standard_separating_family(int n) {
  if (n < 1 || n > 3) throw std::invalid_argument("family defined for n in 1..3");
  FunctionExpr decay = FunctionExpr::coordinate(1);
  for (int j = 2; j <= n; ++j) decay = decay + FunctionExpr::coordinate(j);
  decay = FunctionExpr::exp_neg(decay);
  const auto coord_pow = [&](int j, int p) {
    FunctionExpr f = FunctionExpr::constant(1.0);
    for (int i = 0; i < p; ++i) f = f * FunctionExpr::coordinate(j);
    return f;
  };
  const auto unit = [&](int j, int p) {
    std::vector<int> l(n, 0);
    l[j - 1] = p;
    return l;
  };
  std::vector<GeneratorTerm> fam;
  fam.push_back({decay, std::vector<int>(n, 0)});
  for (int j = 1; j <= n; ++j) fam.push_back({coord_pow(j, 1) * decay, std::vector<int>(n, 0)});
  for (int j = 1; j <= n; ++j) fam.push_back({coord_pow(j, 1) * decay, unit(j, 1)});
  for (int j = 1; j <= n; ++j) fam.push_back({coord_pow(j, 2) * decay, unit(j, 2)});
  for (int j = 1; j + 1 <= n; ++j) {
    std::vector<int> l(n, 0);
    l[j - 1] = 1;
    l[j] = -1;
    fam.push_back({coord_pow(j, 1) * coord_pow(j + 1, 1) * decay, l});
  }
  // pad smaller dimensions to the fixed size of 12
  int extra = 3;
  while (static_cast<int>(fam.size()) < 12) {
    fam.push_back({coord_pow(1, extra) * decay, unit(1, extra)});
    ++extra;
  }
  fam.resize(12);
  return fam;
}

/// A point of C^n in polar form.  Keeping moduli and phases separate lets
/// pairs that differ only by the phase of a zero coordinate be expressed
/// (they denote the same complex point; a well-formed family must not
/// separate them).
struct PolarPoint {
  std::vector<double> modulus;
  std::vector<double> phase;
};

/// Classical value f(|z_1|,..,|z_n|) e^{i l.theta} of a generator term.
inline Complex classical_value(const GeneratorTerm& term, const PolarPoint& p, double q) {
  const double mag = term.f.eval(p.modulus, q);
  double angle = 0.0;
  for (std::size_t j = 0; j < term.shift.size(); ++j)
    angle += term.shift[j] * p.phase[j];
  Complex v = mag * Complex(std::cos(angle), std::sin(angle));
  return term.starred ? std::conj(v) : v;
}

struct SeparationReport {
  double threshold = 0.0;
  std::size_t pairs_checked = 0;
  std::vector<std::size_t> unseparated;  // indices of pairs no term separates
};

/// Evaluates each classical generator at both points of every pair and
/// reports the pairs whose values agree (within the threshold) across the
/// whole family.
inline SeparationReport classical_separation(
    std::span<const std::pair<PolarPoint, PolarPoint>> pairs,
    std::span<const GeneratorTerm> family, int n, double q,
    double threshold = 1e-9) {
  for (const GeneratorTerm& t : family) enforce_vanishing(t, n, q);
  SeparationReport rep;
  rep.threshold = threshold;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    ++rep.pairs_checked;
    double best = 0.0;
    for (const GeneratorTerm& t : family)
      best = std::max(best, std::abs(classical_value(t, pairs[i].first, q) -
                                     classical_value(t, pairs[i].second, q)));
    if (!(best > threshold)) rep.unseparated.push_back(i);
  }
  return rep;
}

}  // namespace qcp
