#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcp/basis.hpp"
#include "qcp/evaluate.hpp"
#include "qcp/sparse.hpp"

namespace qcp {

/// A truncated model of one irreducible-type component: the summand on
/// which z_{k+1} = ... = z_n = 0 and z_k is injective.  Immutable after
/// construction; all operators are materialized eagerly.
///
/// Basis enumeration (documented order): fiber sample id is the most
/// significant digit, then i_1..i_{k-1} in 1..N, then i_k in -M..M, the
/// last index fastest.  Raising out of the window truncates to zero;
/// lowering a unilateral index below 1 carries weight sqrt(q^0 - 1) = 0
/// exactly, so the bottom edge is the natural kernel, not a cutoff.
class RepComponent {
 public:
  enum class Route { abstract_shift, lattice };

  int n() const { return trunc_.n; }
  int component() const { return k_; }
  double q() const { return trunc_.q; }
  const TruncationSpec& truncation() const { return trunc_; }
  const std::vector<double>& fibers() const { return fibers_; }
  Route route() const { return route_; }
  std::size_t dim() const { return dim_; }

  /// z_j, 1 <= j <= n (zero operator for j > k).
  const SparseOperator& z(int j) const { return z_.at(check_gen(j) - 1); }

  /// Shift part S_j of the polar decomposition (entries 1 on the in-window
  /// raising pairs; zero operator for j > k).
  const SparseOperator& shift(int j) const { return shift_.at(check_gen(j) - 1); }

  /// Modulus |z_j| = sqrt(z_j* z_j): diagonal, carrying the shift weight
  /// at the source index (0 where raising leaves the window).
  const SparseOperator& modulus(int j) const { return mod_.at(check_gen(j) - 1); }

  /// Q_j = sum_{m=j}^{n} z_m* z_m as a sparse composition on the
  /// truncation.  Exactly diagonal.
  const SparseOperator& Q(int j) const { return q_ops_.at(check_gen(j) - 1); }

  /// Closed-form diagonal q^{-2(i_j+...+i_k)} a_s^2 of Q_j in the
  /// untruncated model (0 for j > k).  The computed Q(j) matches this on
  /// the interior; spectral strata are defined against this diagonal.
  const std::vector<double>& ideal_Q_diagonal(int j) const {
    return ideal_q_diag_.at(check_gen(j) - 1);
  }

  /// Spectral projection E_j((lo, hi]): diagonal 0/1 selecting basis
  /// vectors whose Q_j stratum value lies in the half-open interval.
  SparseOperator spectral_projection(int j, double lo, double hi) const {
    const std::vector<double>& d = ideal_Q_diagonal(j);
    SparseOperator p(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      if (d[i] > lo && d[i] <= hi) p.set(i, i, 1.0);
    return p;
  }

  /// w_j = sqrt(Q_{j+1})^{-1} z_j, defined for j < k where Q_{j+1} is
  /// strictly positive on the component.
  SparseOperator w(int j) const {
    check_gen(j);
    if (j >= k_)
      throw std::domain_error("w_j needs Q_{j+1} > 0, which fails for j >= k");
    const std::vector<double>& d = ideal_Q_diagonal(j + 1);
    SparseOperator r(dim_);
    for (const auto& [rc, v] : z(j).entries())
      r.set(rc.first, rc.second, v / std::sqrt(d[rc.first]));
    return r;
  }

  const BasisIndex& basis(std::size_t ordinal) const { return basis_.at(ordinal); }

  /// Ordinal of a basis index, or nullopt if outside the window.
  std::optional<std::size_t> ordinal(int fiber, const std::vector<int>& levels) const {
    if (fiber < 0 || static_cast<std::size_t>(fiber) >= fibers_.size())
      return std::nullopt;
    if (static_cast<int>(levels.size()) != k_) return std::nullopt;
    std::size_t ord = static_cast<std::size_t>(fiber);
    for (int m = 0; m + 1 < k_; ++m) {
      if (levels[m] < 1 || levels[m] > trunc_.unilateral_max) return std::nullopt;
      ord = ord * trunc_.unilateral_max + (levels[m] - 1);
    }
    if (k_ >= 1) {
      const int M = trunc_.bilateral_max;
      if (levels[k_ - 1] < -M || levels[k_ - 1] > M) return std::nullopt;
      ord = ord * (2 * M + 1) + (levels[k_ - 1] + M);
    }
    return ord;
  }

  /// Lattice point of a basis vector: t_m = q^{-i_m} for m < k and
  /// t_k = a_s q^{-i_k}.  Well-defined for both builder routes.
  std::vector<double> atom(std::size_t ord) const {
    const BasisIndex& b = basis_.at(ord);
    std::vector<double> t(k_);
    for (int m = 0; m + 1 < k_; ++m) t[m] = std::pow(trunc_.q, -b.levels[m]);
    if (k_ >= 1)
      t[k_ - 1] = fibers_[b.fiber] * std::pow(trunc_.q, -b.levels[k_ - 1]);
    return t;
  }

  bool interior(std::size_t ord) const {
    const BasisIndex& b = basis_.at(ord);
    const int d = trunc_.interior_margin;
    for (int m = 0; m + 1 < k_; ++m)
      if (b.levels[m] < 1 + d || b.levels[m] > trunc_.unilateral_max - d)
        return false;
    if (k_ >= 1) {
      const int ik = b.levels[k_ - 1];
      if (ik < -trunc_.bilateral_max + d || ik > trunc_.bilateral_max - d)
        return false;
    }
    return true;
  }

  std::vector<std::size_t> interior_set() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < dim_; ++i)
      if (interior(i)) s.push_back(i);
    return s;
  }

  friend RepComponent build_component_abstract(int, const TruncationSpec&,
                                               const FiberSpectrum&);
  friend RepComponent build_component_lattice(int, const TruncationSpec&,
                                              const MeasureSpec&);

 private:
  RepComponent(int k, const TruncationSpec& t, std::vector<double> fibers,
               Route route)
      : trunc_(t), k_(k), fibers_(std::move(fibers)), route_(route) {
    if (k < 0 || k > t.n) throw std::invalid_argument("component index out of 0..n");
    if (k_ == 0) {
      fibers_.assign(1, 1.0);  // unused; keeps atom/ordinal arithmetic total
      dim_ = 1;
      basis_.push_back(BasisIndex{0, 0, {}});
    } else {
      dim_ = fibers_.size();
      for (int m = 0; m + 1 < k_; ++m) dim_ *= t.unilateral_max;
      dim_ *= 2 * t.bilateral_max + 1;
      basis_.reserve(dim_);
      std::vector<int> levels(k_, 1);
      levels[k_ - 1] = -t.bilateral_max;
      for (std::size_t f = 0; f < fibers_.size(); ++f) {
        std::fill(levels.begin(), levels.end(), 1);
        levels[k_ - 1] = -t.bilateral_max;
        for (;;) {
          basis_.push_back(BasisIndex{k_, static_cast<int>(f), levels});
          int pos = k_ - 1;
          for (;;) {
            const int hi = (pos == k_ - 1) ? t.bilateral_max : t.unilateral_max;
            const int lo = (pos == k_ - 1) ? -t.bilateral_max : 1;
            if (levels[pos] < hi) {
              ++levels[pos];
              break;
            }
            levels[pos] = lo;
            --pos;
            if (pos < 0) break;
          }
          if (pos < 0) break;
        }
      }
    }
    build_operators();
  }

  int check_gen(int j) const {
    if (j < 1 || j > trunc_.n) throw std::out_of_range("generator index out of range");
    return j;
  }

  /// Shift weight of z_j at a source basis vector, evaluated by the route
  /// the component was built with: the abstract route uses the weighted-
  /// shift exponent formulas, the lattice route evaluates the
  /// multiplication-operator coefficients at the atom.  The two are equal
  /// up to floating error.
  double weight(int j, const BasisIndex& b) const {
    const double q = trunc_.q;
    const double a = fibers_[b.fiber];
    if (route_ == Route::abstract_shift) {
      if (j == k_) return std::pow(q, -b.levels[k_ - 1]) * a;
      long tail = 0;
      for (int m = j; m < k_; ++m) tail += b.levels[m];  // i_{j+1}+...+i_k
      return std::sqrt(std::pow(q, -2 * b.levels[j - 1]) - 1.0) *
             std::pow(q, -static_cast<double>(tail)) * a;
    }
    // lattice route: coefficients of (z_k h)(t) = q t_k h(.., q t_k) and
    // (z_j h)(t) = sqrt((q t_j)^2 - 1) t_{j+1}..t_k h(.., q t_j, ..),
    // evaluated at the target atom (whose j-th index is i_j + 1).
    if (j == k_) {
      const double t_target = a * std::pow(q, -(b.levels[k_ - 1] + 1));
      return q * t_target;
    }
    const double qt = std::pow(q, -b.levels[j - 1]);  // q * t_j(target)
    double prod = 1.0;
    for (int m = j + 1; m < k_; ++m) prod *= std::pow(q, -b.levels[m - 1]);
    if (k_ >= 1) prod *= a * std::pow(q, -b.levels[k_ - 1]);
    return std::sqrt(qt * qt - 1.0) * prod;
  }

  void build_operators() {
    const int n = trunc_.n;
    z_.assign(n, SparseOperator(dim_));
    shift_.assign(n, SparseOperator(dim_));
    mod_.assign(n, SparseOperator(dim_));
    for (int j = 1; j <= k_; ++j) {
      for (std::size_t ord = 0; ord < dim_; ++ord) {
        const BasisIndex& b = basis_[ord];
        std::vector<int> up = b.levels;
        ++up[j - 1];
        const auto target = ordinal(b.fiber, up);
        if (!target) continue;  // raising out of the window truncates to 0
        const double v = weight(j, b);
        z_[j - 1].set(*target, ord, v);
        shift_[j - 1].set(*target, ord, 1.0);
        mod_[j - 1].set(ord, ord, v);
      }
    }
    q_ops_.reserve(n);
    ideal_q_diag_.assign(n, std::vector<double>(dim_, 0.0));
    for (int j = n; j >= 1; --j) {
      SparseOperator qop = z_[j - 1].adjoint() * z_[j - 1];
      if (j < n) qop = qop + q_ops_.front();
      if (!qop.is_diagonal())
        throw std::logic_error("Q operator picked up off-diagonal entries");
      q_ops_.insert(q_ops_.begin(), std::move(qop));
    }
    for (int j = 1; j <= k_; ++j) {
      std::vector<double>& d = ideal_q_diag_[j - 1];
      for (std::size_t ord = 0; ord < dim_; ++ord) {
        const BasisIndex& b = basis_[ord];
        long sum = 0;
        for (int m = j; m <= k_; ++m) sum += b.levels[m - 1];
        const double a = fibers_[b.fiber];
        d[ord] = std::pow(trunc_.q, -2.0 * static_cast<double>(sum)) * a * a;
      }
    }
  }

  TruncationSpec trunc_;
  int k_;
  std::vector<double> fibers_;
  Route route_;
  std::size_t dim_ = 0;
  std::vector<BasisIndex> basis_;
  std::vector<SparseOperator> z_, shift_, mod_, q_ops_;
  std::vector<std::vector<double>> ideal_q_diag_;
};

/// Component builder in the abstract (weighted-shift) normal form.
inline RepComponent build_component_abstract(int k, const TruncationSpec& t,
                                             const FiberSpectrum& spectrum) {
  if (k > 0) spectrum.validate(t.q);
  std::vector<double> fibers = k > 0 ? spectrum.samples : std::vector<double>{};
  return RepComponent(k, t, std::move(fibers), RepComponent::Route::abstract_shift);
}

/// Component builder in the lattice (L2 multiplication-operator) form.
/// The bilateral index relabeling that matches the two pictures is applied
/// here, so both builders share one enumeration and the basis bijection
/// between them is the identity.
inline RepComponent build_component_lattice(int k, const TruncationSpec& t,
                                            const MeasureSpec& measure) {
  if (k > 0) measure.validate(t.q);
  std::vector<double> fibers = k > 0 ? measure.samples : std::vector<double>{};
  return RepComponent(k, t, std::move(fibers), RepComponent::Route::lattice);
}

/// Bilateral weighted shift of a q-normal operator: z h_{s,i} =
/// q^{-i} a_s h_{s,i+1} on the window |i| <= M.
inline SparseOperator build_qnormal(const FiberSpectrum& spectrum, int bilateral_max,
                                    double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0,1)");
  if (bilateral_max < 1) throw std::invalid_argument("window must be >= 1");
  spectrum.validate(q);
  const int B = 2 * bilateral_max + 1;
  SparseOperator z(spectrum.samples.size() * B);
  for (std::size_t s = 0; s < spectrum.samples.size(); ++s)
    for (int i = -bilateral_max; i < bilateral_max; ++i) {
      const std::size_t src = s * B + (i + bilateral_max);
      z.set(src + 1, src, std::pow(q, -i) * spectrum.samples[s]);
    }
  return z;
}

/// Unilateral weighted shift w h_i = sqrt(q^{-2i} - 1) h_{i+1} on 1..M.
inline SparseOperator build_qhyp(int unilateral_max, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0,1)");
  if (unilateral_max < 2) throw std::invalid_argument("window must be >= 2");
  SparseOperator w(unilateral_max);
  for (int i = 1; i < unilateral_max; ++i)
    w.set(i, i - 1, std::sqrt(std::pow(q, -2 * i) - 1.0));
  return w;
}

/// Image of an evaluated *-polynomial under the component representation.
inline SparseOperator operator_image(const RepComponent& rep,
                                     const EvaluatedPolynomial& poly) {
  if (poly.n != rep.n()) throw std::invalid_argument("dimension mismatch");
  SparseOperator acc(rep.dim());
  for (const auto& [word, coeff] : poly.terms) {
    SparseOperator term = SparseOperator::identity(rep.dim());
    for (const Letter& l : word)
      term = term * (l.star ? rep.z(l.gen).adjoint() : rep.z(l.gen));
    acc = acc + term.scaled(coeff);
  }
  return acc;
}

struct RelationResult {
  std::string relation;
  int component;
  double max_residual;
  std::size_t interior_size;
};

struct VerificationReport {
  double tolerance = 0.0;
  std::vector<RelationResult> entries;

  bool pass() const {
    for (const auto& e : entries)
      if (!(e.max_residual <= tolerance)) return false;
    return true;
  }
  double worst() const {
    double w = 0.0;
    for (const auto& e : entries) w = std::max(w, e.max_residual);
    return w;
  }
};

namespace detail {

/// Max over interior basis vectors e_c of
///   ||(L - R) e_c|| / max(1, ||L e_c||, ||R e_c||).
/// Residuals are relative to the magnitude of the two sides at that
/// vector (entries scale like q^{-Sigma} and absolute tolerances would be
/// meaningless deep in the window) with an absolute floor of 1 so that
/// 0 = 0 relations are measured absolutely.
inline double interior_residual(const SparseOperator& lhs, const SparseOperator& rhs,
                                const std::vector<bool>& interior) {
  std::vector<double> diffsq(lhs.dim(), 0.0), lsq(lhs.dim(), 0.0),
      rsq(lhs.dim(), 0.0);
  const SparseOperator diff = lhs - rhs;
  for (const auto& [rc, v] : diff.entries()) diffsq[rc.second] += std::norm(v);
  for (const auto& [rc, v] : lhs.entries()) lsq[rc.second] += std::norm(v);
  for (const auto& [rc, v] : rhs.entries()) rsq[rc.second] += std::norm(v);
  double m = 0.0;
  for (std::size_t c = 0; c < lhs.dim(); ++c)
    if (interior[c])
      m = std::max(m, std::sqrt(diffsq[c]) /
                          std::max({1.0, std::sqrt(lsq[c]), std::sqrt(rsq[c])}));
  return m;
}

}  // namespace detail

/// Apply both sides of every defining relation, plus (optionally) the
/// measurable-function commutation relations for an indicator and a
/// bounded rational sample, to every interior basis vector; report the
/// max residual per relation.  Failures are report entries, never
/// exceptions.
inline VerificationReport verify_relations(const RepComponent& rep, double tolerance,
                                           bool include_function_commutation = true) {
  VerificationReport report;
  report.tolerance = tolerance;
  const int n = rep.n();
  const double q = rep.q();
  std::vector<bool> interior(rep.dim());
  std::size_t interior_size = 0;
  for (std::size_t i = 0; i < rep.dim(); ++i) {
    interior[i] = rep.interior(i);
    if (interior[i]) ++interior_size;
  }
  const auto push = [&](std::string name, const SparseOperator& lhs,
                        const SparseOperator& rhs) {
    report.entries.push_back({std::move(name), rep.component(),
                              detail::interior_residual(lhs, rhs, interior),
                              interior_size});
  };
  const auto tag = [](const char* base, int a, int b) {
    return std::string(base) + "[" + std::to_string(a) + "," + std::to_string(b) + "]";
  };

  for (int j = 2; j <= n; ++j)
    for (int i = 1; i < j; ++i)
      push(tag("R1a", j, i), rep.z(j) * rep.z(i), (rep.z(i) * rep.z(j)).scaled(q));
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i <= n; ++i) {
      if (i == j) continue;
      push(tag("R1b", j, i), rep.z(j) * rep.z(i).adjoint(),
           (rep.z(i).adjoint() * rep.z(j)).scaled(q));
    }
  for (int i = 1; i < n; ++i)
    push("R2a[" + std::to_string(i) + "]", rep.z(i) * rep.z(i).adjoint(),
         (rep.z(i).adjoint() * rep.z(i)).scaled(q * q) -
             rep.Q(i + 1).scaled(1.0 - q * q));
  push("R2b", rep.z(n) * rep.z(n).adjoint(),
       (rep.z(n).adjoint() * rep.z(n)).scaled(q * q));
  if (!include_function_commutation) return report;

  // f(Q_k) z_j = z_j f(q^{-2} Q_k) for j >= k, f(Q_k) z_i = z_i f(Q_k) for
  // i < k, and the adjoint forms; f ranges over an indicator and a bounded
  // rational function.
  struct Sample {
    const char* name;
    double (*f)(double);
  };
  const Sample samples[] = {
      {"ind", [](double x) { return (x > 1.0 && x <= 16.0) ? 1.0 : 0.0; }},
      {"rat", [](double x) { return x / (1.0 + x); }},
  };
  for (const Sample& s : samples)
    for (int kk = 1; kk <= n; ++kk) {
      const SparseOperator fQ =
          map_diagonal(rep.Q(kk), [&](Complex v) { return Complex(s.f(v.real())); });
      const SparseOperator fQ_up = map_diagonal(
          rep.Q(kk), [&](Complex v) { return Complex(s.f(v.real() / (q * q))); });
      const SparseOperator fQ_down = map_diagonal(
          rep.Q(kk), [&](Complex v) { return Complex(s.f(v.real() * q * q)); });
      for (int j = 1; j <= n; ++j) {
        const std::string base = std::string("fQ") + s.name;
        if (j < kk) {
          push(tag((base + "z").c_str(), kk, j), fQ * rep.z(j), rep.z(j) * fQ);
          push(tag((base + "z*").c_str(), kk, j), fQ * rep.z(j).adjoint(),
               rep.z(j).adjoint() * fQ);
        } else {
          push(tag((base + "z").c_str(), kk, j), fQ * rep.z(j), rep.z(j) * fQ_up);
          push(tag((base + "z*").c_str(), kk, j), fQ * rep.z(j).adjoint(),
               rep.z(j).adjoint() * fQ_down);
        }
      }
    }
  return report;
}

/// Direct sum of components over one (n, q): block-diagonal operators on
/// the concatenated bases.
class RepDirectSum {
 public:
  explicit RepDirectSum(std::vector<RepComponent> comps) : comps_(std::move(comps)) {
    if (comps_.empty()) throw std::invalid_argument("empty direct sum");
    for (const auto& c : comps_) {
      if (c.n() != comps_.front().n() || c.q() != comps_.front().q())
        throw std::invalid_argument("direct sum needs matching n and q");
      offsets_.push_back(dim_);
      dim_ += c.dim();
    }
  }

  std::size_t dim() const { return dim_; }
  int n() const { return comps_.front().n(); }
  double q() const { return comps_.front().q(); }
  const std::vector<RepComponent>& components() const { return comps_; }
  std::size_t offset(std::size_t block) const { return offsets_.at(block); }

  SparseOperator z(int j) const {
    std::vector<SparseOperator> blocks;
    for (const auto& c : comps_) blocks.push_back(c.z(j));
    return SparseOperator::block_diag(blocks);
  }

  SparseOperator Q(int j) const {
    std::vector<SparseOperator> blocks;
    for (const auto& c : comps_) blocks.push_back(c.Q(j));
    return SparseOperator::block_diag(blocks);
  }

  VerificationReport verify(double tolerance) const {
    VerificationReport all;
    all.tolerance = tolerance;
    for (const auto& c : comps_) {
      VerificationReport r = verify_relations(c, tolerance);
      all.entries.insert(all.entries.end(), r.entries.begin(), r.entries.end());
    }
    return all;
  }

 private:
  std::vector<RepComponent> comps_;
  std::vector<std::size_t> offsets_;
  std::size_t dim_ = 0;
};

inline RepDirectSum direct_sum(std::vector<RepComponent> comps) {
  return RepDirectSum(std::move(comps));
}

}  // namespace qcp
