#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>

namespace qcp {

/// Exact rational scalar (arbitrary precision, backed by GMP).
using Rational = mpq_class;

/// Laurent polynomial in the deformation parameter q with rational
/// coefficients.  Zero coefficients are never stored and equality is
/// structural, so two values compare equal iff they are the same element
/// of Q[q, q^-1].
class LaurentPoly {
 public:
  LaurentPoly() = default;

  LaurentPoly(long value) {
    if (value != 0) coeff_[0] = Rational(value);
  }

  LaurentPoly(const Rational& value) {
    if (value != 0) coeff_[0] = value;
  }

  static LaurentPoly monomial(const Rational& c, int power) {
    LaurentPoly p;
    if (c != 0) p.coeff_[power] = c;
    return p;
  }

  /// q^power
  static LaurentPoly q(int power = 1) { return monomial(Rational(1), power); }

  bool is_zero() const { return coeff_.empty(); }

  bool is_one() const {
    return coeff_.size() == 1 && coeff_.begin()->first == 0 &&
           coeff_.begin()->second == 1;
  }

  bool is_monomial() const { return coeff_.size() == 1; }

  const std::map<int, Rational>& coefficients() const { return coeff_; }

  int lowest_power() const {
    if (is_zero()) throw std::logic_error("lowest_power of zero");
    return coeff_.begin()->first;
  }

  /// All powers of q non-negative (element of Q[q]).
  bool polynomial_in_q() const {
    return coeff_.empty() || coeff_.begin()->first >= 0;
  }

  /// All coefficients integers (element of Z[q, q^-1]).
  bool integral() const {
    for (const auto& [k, c] : coeff_)
      if (c.get_den() != 1) return false;
    return true;
  }

  LaurentPoly& operator+=(const LaurentPoly& o) {
    for (const auto& [k, c] : o.coeff_) {
      Rational& slot = coeff_[k];
      slot += c;
      if (slot == 0) coeff_.erase(k);
    }
    return *this;
  }

  LaurentPoly& operator-=(const LaurentPoly& o) {
    for (const auto& [k, c] : o.coeff_) {
      Rational& slot = coeff_[k];
      slot -= c;
      if (slot == 0) coeff_.erase(k);
    }
    return *this;
  }

  friend LaurentPoly operator+(LaurentPoly a, const LaurentPoly& b) {
    a += b;
    return a;
  }

  friend LaurentPoly operator-(LaurentPoly a, const LaurentPoly& b) {
    a -= b;
    return a;
  }

  LaurentPoly operator-() const {
    LaurentPoly r;
    for (const auto& [k, c] : coeff_) r.coeff_[k] = -c;
    return r;
  }

  friend LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
    LaurentPoly r;
    for (const auto& [ka, ca] : a.coeff_)
      for (const auto& [kb, cb] : b.coeff_) {
        Rational& slot = r.coeff_[ka + kb];
        slot += ca * cb;
        if (slot == 0) r.coeff_.erase(ka + kb);
      }
    return r;
  }

  LaurentPoly& operator*=(const LaurentPoly& o) { return *this = *this * o; }

  /// Multiply by q^k (shift every exponent).
  LaurentPoly shifted(int k) const {
    LaurentPoly r;
    for (const auto& [p, c] : coeff_) r.coeff_[p + k] = c;
    return r;
  }

  /// Inverse of an invertible element (a single monomial).
  LaurentPoly inverse() const {
    if (coeff_.size() != 1)
      throw std::domain_error("only q-monomials are invertible");
    const auto& [k, c] = *coeff_.begin();
    return monomial(Rational(c.get_den(), c.get_num()), -k);
  }

  bool operator==(const LaurentPoly& o) const { return coeff_ == o.coeff_; }
  bool operator!=(const LaurentPoly& o) const { return !(*this == o); }

  double eval(double q_value) const {
    double acc = 0.0;
    for (const auto& [k, c] : coeff_) acc += c.get_d() * std::pow(q_value, k);
    return acc;
  }

  /// Compact canonical form, ascending powers: "1-q^2", "3/2*q^-1", "q".
  std::string str() const {
    if (coeff_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [k, c] : coeff_) {
      const bool neg = c < 0;
      Rational mag = neg ? Rational(-c) : c;
      if (first)
        out += neg ? "-" : "";
      else
        out += neg ? "-" : "+";
      out += piece(mag, k);
      first = false;
    }
    return out;
  }

  /// Printable as a multiplicative prefix ("q^2", "3/2*q", "3") without
  /// parentheses; only true for monomials.
  std::string monomial_str() const {
    if (coeff_.size() != 1)
      throw std::logic_error("monomial_str on non-monomial");
    const auto& [k, c] = *coeff_.begin();
    const bool neg = c < 0;
    Rational mag = neg ? Rational(-c) : c;
    return (neg ? "-" : "") + piece(mag, k);
  }

 private:
  static std::string piece(const Rational& mag, int k) {
    std::string qs;
    if (k == 1)
      qs = "q";
    else if (k != 0)
      qs = "q^" + std::to_string(k);
    if (k == 0) return mag.get_str();
    if (mag == 1) return qs;
    return mag.get_str() + "*" + qs;
  }

  std::map<int, Rational> coeff_;
};

}  // namespace qcp
