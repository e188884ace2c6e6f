#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcp/qpolynomial.hpp"
#include "qcp/rng.hpp"

namespace qcp {

// Rewriting system for the defining relations, oriented so that starred
// letters move left and both blocks sort (starred indices non-increasing,
// unstarred non-decreasing).  All rule coefficients lie in Z[q]:
//   (a) z_j z_i      -> q z_i z_j                        j > i
//   (b) z_i* z_j*    -> q z_j* z_i*                      j > i
//   (c) z_j z_i*     -> q z_i* z_j                       j != i
//   (d) z_i z_i*     -> q^2 z_i* z_i - (1-q^2) sum_{j>i} z_j* z_j   i < n
//   (e) z_n z_n*     -> q^2 z_n* z_n

/// True iff the adjacent pair (w[pos], w[pos+1]) is a redex.
inline bool pair_reducible(const Letter& a, const Letter& b) {
  if (!a.star && !b.star) return a.gen > b.gen;   // (a)
  if (a.star && b.star) return a.gen < b.gen;     // (b)
  if (!a.star && b.star) return true;             // (c)/(d)/(e)
  return false;                                   // starred-then-unstarred is sorted
}

inline std::optional<std::size_t> leftmost_redex(const Word& w) {
  for (std::size_t p = 0; p + 1 < w.size(); ++p)
    if (pair_reducible(w[p], w[p + 1])) return p;
  return std::nullopt;
}

inline std::vector<std::size_t> all_redexes(const Word& w) {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p + 1 < w.size(); ++p)
    if (pair_reducible(w[p], w[p + 1])) out.push_back(p);
  return out;
}

inline bool is_normal_word(const Word& w) { return !leftmost_redex(w); }

/// Replace the pair at `pos` by the polynomial `repl` inside `w`.
inline QPolynomial splice(int n, const Word& w, std::size_t pos,
                          const QPolynomial& repl) {
  QPolynomial out(n);
  const Word prefix(w.begin(), w.begin() + pos);
  const Word suffix(w.begin() + pos + 2, w.end());
  for (const auto& [mid, c] : repl.terms()) {
    Word nw = prefix;
    nw.insert(nw.end(), mid.begin(), mid.end());
    nw.insert(nw.end(), suffix.begin(), suffix.end());
    out.add_term(nw, c);
  }
  return out;
}

/// One oriented rule: a two-letter pattern and its replacement.  Every
/// replacement has coefficients in Z[q] and strictly decreases the
/// termination measure (tested).
struct RewriteRule {
  Word pattern;
  QPolynomial replacement;
};

/// The full oriented rule set for dimension n, as data.  rewrite_at applies
/// the same rules without materializing the table.
inline std::vector<RewriteRule> rule_table(int n) {
  std::vector<RewriteRule> rules;
  const auto pair_word = [](Letter a, Letter b) { return Word{a, b}; };
  const LaurentPoly defect = LaurentPoly(1) - LaurentPoly::q(2);
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i <= n; ++i) {
      if (j > i) {  // (a) z_j z_i -> q z_i z_j
        QPolynomial r(n);
        r.add_term(pair_word({i, false}, {j, false}), LaurentPoly::q());
        rules.push_back({pair_word({j, false}, {i, false}), std::move(r)});
        // (b) z_i* z_j* -> q z_j* z_i*
        QPolynomial rb(n);
        rb.add_term(pair_word({j, true}, {i, true}), LaurentPoly::q());
        rules.push_back({pair_word({i, true}, {j, true}), std::move(rb)});
      }
      if (j != i) {  // (c) z_j z_i* -> q z_i* z_j
        QPolynomial r(n);
        r.add_term(pair_word({i, true}, {j, false}), LaurentPoly::q());
        rules.push_back({pair_word({j, false}, {i, true}), std::move(r)});
      }
    }
  for (int i = 1; i <= n; ++i) {  // (d)/(e)
    QPolynomial r(n);
    r.add_term(pair_word({i, true}, {i, false}), LaurentPoly::q(2));
    for (int j = i + 1; j <= n; ++j)
      r.add_term(pair_word({j, true}, {j, false}), -defect);
    rules.push_back({pair_word({i, false}, {i, true}), std::move(r)});
  }
  return rules;
}

/// Apply the unique rule matching the redex at `pos`.
inline QPolynomial rewrite_at(int n, const Word& w, std::size_t pos) {
  const Letter a = w[pos], b = w[pos + 1];
  QPolynomial repl(n);
  if (!a.star && !b.star) {  // (a)
    repl.add_term(Word{b, a}, LaurentPoly::q());
  } else if (a.star && b.star) {  // (b)
    repl.add_term(Word{b, a}, LaurentPoly::q());
  } else if (!a.star && b.star && a.gen != b.gen) {  // (c)
    repl.add_term(Word{b, a}, LaurentPoly::q());
  } else {  // (d)/(e): a = z_i, b = z_i*
    const int i = a.gen;
    repl.add_term(Word{Letter{i, true}, Letter{i, false}}, LaurentPoly::q(2));
    const LaurentPoly defect = LaurentPoly(1) - LaurentPoly::q(2);  // 1-q^2
    for (int j = i + 1; j <= n; ++j)
      repl.add_term(Word{Letter{j, true}, Letter{j, false}}, -defect);
  }
  return splice(n, w, pos, repl);
}

/// Termination measure: (star-after-unstar inversions, within-block
/// disorder).  Every rule application strictly decreases it
/// lexicographically on each produced word.
inline std::pair<long, long> word_measure(const Word& w) {
  long inversions = 0, disorder = 0;
  for (std::size_t p = 0; p < w.size(); ++p)
    for (std::size_t r = p + 1; r < w.size(); ++r) {
      if (!w[p].star && w[r].star) ++inversions;
      if (!w[p].star && !w[r].star && w[p].gen > w[r].gen) ++disorder;
      if (w[p].star && w[r].star && w[p].gen < w[r].gen) ++disorder;
    }
  return {inversions, disorder};
}

namespace detail {

class Normalizer {
 public:
  explicit Normalizer(int n) : n_(n) {}

  const QPolynomial& normal(const Word& w) {
    auto it = memo_.find(w);
    if (it != memo_.end()) return it->second;
    QPolynomial result(n_);
    auto pos = leftmost_redex(w);
    if (!pos) {
      result.add_term(w, LaurentPoly(1));
    } else {
      const QPolynomial step = rewrite_at(n_, w, *pos);
      for (const auto& [w2, c] : step.terms()) result += c * normal(w2);
    }
    return memo_.emplace(w, std::move(result)).first->second;
  }

  /// Longest single-term rewrite chain from w to a normal word.
  long depth(const Word& w) {
    auto it = depth_.find(w);
    if (it != depth_.end()) return it->second;
    long d = 0;
    if (auto pos = leftmost_redex(w)) {
      const QPolynomial step = rewrite_at(n_, w, *pos);
      for (const auto& [w2, c] : step.terms()) d = std::max(d, 1 + depth(w2));
    }
    depth_.emplace(w, d);
    return d;
  }

 private:
  int n_;
  std::map<Word, QPolynomial, WordLess> memo_;
  std::map<Word, long, WordLess> depth_;
};

}  // namespace detail

/// Canonical representative of p modulo the defining relations: every word
/// has starred letters first (indices non-increasing), then unstarred
/// (non-decreasing).  Leftmost-innermost strategy; the result is
/// strategy-independent (see check_local_confluence).
inline QPolynomial normal_form(const QPolynomial& p) {
  detail::Normalizer nrm(p.n());
  QPolynomial out(p.n());
  for (const auto& [w, c] : p.terms()) out += c * nrm.normal(w);
  return out;
}

/// Reusable normalizer sharing the word memo across calls.  Worth it for
/// identity suites that reduce thousands of overlapping words; not safe
/// for concurrent use (the pure free functions are).
class RewriteEngine {
 public:
  explicit RewriteEngine(int n) : n_(n), nrm_(n) {}

  QPolynomial normal_form(const QPolynomial& p) {
    if (p.n() != n_) throw std::invalid_argument("mixed dimensions");
    QPolynomial out(n_);
    for (const auto& [w, c] : p.terms()) out += c * nrm_.normal(w);
    return out;
  }

  bool verify(const QPolynomial& lhs, const QPolynomial& rhs) {
    return normal_form(lhs - rhs).is_zero();
  }

 private:
  int n_;
  detail::Normalizer nrm_;
};

/// Length of the longest rewrite chain needed to normalize w.
inline long normalization_depth(int n, const Word& w) {
  detail::Normalizer nrm(n);
  return nrm.depth(w);
}

/// Q_k = sum_{j=k}^{n} z_j^* z_j (already in normal form).
inline QPolynomial build_Q(int k, int n) {
  if (k < 1 || k > n) throw std::out_of_range("Q index out of range");
  QPolynomial q(n);
  for (int j = k; j <= n; ++j)
    q.add_term(Word{Letter{j, true}, Letter{j, false}}, LaurentPoly(1));
  return q;
}

struct IdentityCheck {
  bool holds;
  QPolynomial residual;
};

/// lhs == rhs modulo the relations; the residual is normal_form(lhs - rhs).
inline IdentityCheck verify_identity(const QPolynomial& lhs,
                                     const QPolynomial& rhs) {
  QPolynomial res = normal_form(lhs - rhs);
  return {res.is_zero(), std::move(res)};
}

struct DivergentPair {
  Word word;
  std::size_t redex_a, redex_b;
  QPolynomial normal_a, normal_b;
};

struct ConfluenceReport {
  int n = 0;
  int max_len = 0;
  std::uint64_t words_checked = 0;
  bool exhaustive = true;
  std::vector<DivergentPair> divergent;
  bool confluent() const { return divergent.empty(); }
};

namespace detail {

inline Word word_from_code(std::uint64_t code, int len, int n) {
  Word w(len);
  for (int p = 0; p < len; ++p) {
    const int letter = static_cast<int>(code % (2 * n));
    code /= 2 * n;
    w[p] = Letter{letter % n + 1, letter >= n};
  }
  return w;
}

}  // namespace detail

/// Two-path local confluence probe: for each word, apply every possible
/// first rewrite, normalize each branch, and require all branches to agree.
/// Exhaustive up to `sample_threshold` words per length, seeded random
/// sample beyond that.  Divergence is reported, never thrown.
inline ConfluenceReport check_local_confluence(
    int n, int max_len, std::uint64_t sample_threshold = 2'000'000,
    std::uint64_t seed = 0x9cb01dafe11eULL, std::uint64_t sample_size = 50'000) {
  if (max_len < 3)
    throw std::invalid_argument("confluence probe needs max_len >= 3");
  ConfluenceReport rep;
  rep.n = n;
  rep.max_len = max_len;
  for (int len = 2; len <= max_len; ++len) {
    std::uint64_t total = 1;
    for (int i = 0; i < len; ++i) total *= 2 * n;
    const bool exhaustive = total <= sample_threshold;
    if (!exhaustive) rep.exhaustive = false;
    const std::uint64_t count = exhaustive ? total : sample_size;
    DetRng rng(seed ^ (static_cast<std::uint64_t>(len) << 32));
    for (std::uint64_t t = 0; t < count; ++t) {
      const std::uint64_t code = exhaustive ? t : rng.below(total);
      const Word w = detail::word_from_code(code, len, n);
      const auto redexes = all_redexes(w);
      ++rep.words_checked;
      if (redexes.size() < 2) continue;
      std::optional<QPolynomial> first;
      std::size_t first_pos = 0;
      for (const std::size_t pos : redexes) {
        QPolynomial nf = normal_form(rewrite_at(n, w, pos));
        if (!first) {
          first = std::move(nf);
          first_pos = pos;
        } else if (nf != *first) {
          rep.divergent.push_back({w, first_pos, pos, *first, std::move(nf)});
          break;
        }
      }
    }
  }
  return rep;
}

}  // namespace qcp
