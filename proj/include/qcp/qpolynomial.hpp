#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include "qcp/laurent.hpp"
#include "qcp/word.hpp"

namespace qcp {

/// Noncommutative *-polynomial in z_1..z_n, z_1^*..z_n^* with LaurentPoly
/// coefficients.  Purely a free-algebra element: the defining relations are
/// applied by normal_form() (rewrite.hpp), not here.
class QPolynomial {
 public:
  explicit QPolynomial(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("dimension must be >= 1");
  }

  static QPolynomial zero(int n) { return QPolynomial(n); }

  static QPolynomial one(int n) {
    QPolynomial p(n);
    p.terms_[Word{}] = LaurentPoly(1);
    return p;
  }

  static QPolynomial monomial(int n, Word w, LaurentPoly c = LaurentPoly(1)) {
    QPolynomial p(n);
    for (const Letter& l : w)
      if (l.gen < 1 || l.gen > n)
        throw std::out_of_range("generator index out of range");
    if (!c.is_zero()) p.terms_[std::move(w)] = std::move(c);
    return p;
  }

  static QPolynomial generator(int n, int j, bool star = false) {
    return monomial(n, Word{Letter{j, star}});
  }

  static QPolynomial scalar(int n, LaurentPoly c) {
    QPolynomial p(n);
    if (!c.is_zero()) p.terms_[Word{}] = std::move(c);
    return p;
  }

  int n() const { return n_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }
  const std::map<Word, LaurentPoly, WordLess>& terms() const { return terms_; }

  LaurentPoly coefficient(const Word& w) const {
    auto it = terms_.find(w);
    return it == terms_.end() ? LaurentPoly() : it->second;
  }

  void add_term(const Word& w, const LaurentPoly& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(w, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  QPolynomial& operator+=(const QPolynomial& o) {
    check_same(o);
    for (const auto& [w, c] : o.terms_) add_term(w, c);
    return *this;
  }

  QPolynomial& operator-=(const QPolynomial& o) {
    check_same(o);
    for (const auto& [w, c] : o.terms_) add_term(w, -c);
    return *this;
  }

  friend QPolynomial operator+(QPolynomial a, const QPolynomial& b) {
    a += b;
    return a;
  }

  friend QPolynomial operator-(QPolynomial a, const QPolynomial& b) {
    a -= b;
    return a;
  }

  QPolynomial operator-() const {
    QPolynomial r(n_);
    for (const auto& [w, c] : terms_) r.terms_[w] = -c;
    return r;
  }

  friend QPolynomial operator*(const QPolynomial& a, const QPolynomial& b) {
    a.check_same(b);
    QPolynomial r(a.n_);
    for (const auto& [wa, ca] : a.terms_)
      for (const auto& [wb, cb] : b.terms_) r.add_term(concat(wa, wb), ca * cb);
    return r;
  }

  QPolynomial& operator*=(const QPolynomial& o) { return *this = *this * o; }

  friend QPolynomial operator*(const LaurentPoly& c, const QPolynomial& p) {
    QPolynomial r(p.n_);
    for (const auto& [w, pc] : p.terms_) r.add_term(w, c * pc);
    return r;
  }

  /// Antilinear involution: reverse each word, toggle stars.  Coefficients
  /// are real rationals in q, so conjugation fixes them.
  QPolynomial star() const {
    QPolynomial r(n_);
    for (const auto& [w, c] : terms_) {
      Word rev(w.rbegin(), w.rend());
      for (Letter& l : rev) l.star = !l.star;
      r.add_term(rev, c);
    }
    return r;
  }

  QPolynomial pow(int e) const {
    if (e < 0) {
      if (terms_.size() != 1 || !terms_.begin()->first.empty())
        throw std::domain_error("negative power of a non-scalar");
      LaurentPoly inv = terms_.begin()->second.inverse();
      QPolynomial base = scalar(n_, inv);
      return base.pow(-e);
    }
    QPolynomial acc = one(n_);
    for (int i = 0; i < e; ++i) acc *= *this;
    return acc;
  }

  bool operator==(const QPolynomial& o) const {
    return n_ == o.n_ && terms_ == o.terms_;
  }
  bool operator!=(const QPolynomial& o) const { return !(*this == o); }

  /// Canonical text form: terms in word order, Laurent coefficients with
  /// a factored sign, e.g. "q^2*z1#*z1 - (1-q^2)*z2#*z2".
  std::string str() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [w, c] : terms_) {
      // Sign convention: factor out the sign of the lowest-power coefficient.
      const bool neg = c.coefficients().begin()->second < 0;
      LaurentPoly disp = neg ? -c : c;
      if (first)
        out += neg ? "-" : "";
      else
        out += neg ? " - " : " + ";
      out += term_str(disp, w, terms_.size() > 1);
      first = false;
    }
    return out;
  }

 private:
  static std::string term_str(const LaurentPoly& c, const Word& w,
                              bool multi_term) {
    if (w.empty()) {
      if (c.is_monomial()) return c.monomial_str();
      return multi_term ? "(" + c.str() + ")" : c.str();
    }
    if (c.is_one()) return word_str(w);
    if (c.is_monomial()) return c.monomial_str() + "*" + word_str(w);
    return "(" + c.str() + ")*" + word_str(w);
  }

  void check_same(const QPolynomial& o) const {
    if (n_ != o.n_) throw std::invalid_argument("mixed dimensions");
  }

  int n_;
  std::map<Word, LaurentPoly, WordLess> terms_;
};

}  // namespace qcp
