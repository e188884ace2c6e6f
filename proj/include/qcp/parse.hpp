#pragma once

#include <cctype>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qcp/qpolynomial.hpp"

namespace qcp {

/// Syntax or range error with the 0-based offset of the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

namespace detail {

// Grammar (see README for the EBNF):
//   expr     := ['-'] term (('+'|'-') term)*
//   term     := factor ('*' factor)*
//   factor   := atom ['^' exponent]
//   atom     := generator | 'q' | integer | '(' expr ')'
//   exponent := ['-'] integer | '(' ['-'] integer ')'
//   generator:= 'z' digit+ ['#']
class ExprParser {
 public:
  ExprParser(std::string_view text, int n) : text_(text), n_(n) {
    if (n < 1 || n > 9)
      throw std::invalid_argument("dimension must be in 1..9 (tokens z1..z9)");
  }

  QPolynomial parse() {
    QPolynomial p = expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
    return p;
  }

 private:
  QPolynomial expr() {
    skip_ws();
    bool neg = false;
    if (peek() == '-') {
      neg = true;
      ++pos_;
    } else if (peek() == '+') {
      ++pos_;
    }
    QPolynomial acc = term();
    if (neg) acc = -acc;
    for (;;) {
      skip_ws();
      const char c = peek();
      if (c == '+') {
        ++pos_;
        acc += term();
      } else if (c == '-') {
        ++pos_;
        acc -= term();
      } else {
        return acc;
      }
    }
  }

  QPolynomial term() {
    QPolynomial acc = factor();
    for (;;) {
      skip_ws();
      if (peek() == '*') {
        ++pos_;
        acc *= factor();
      } else {
        return acc;
      }
    }
  }

  QPolynomial factor() {
    QPolynomial base = atom();
    skip_ws();
    if (peek() == '^') {
      ++pos_;
      const std::size_t at = pos_;
      const int e = exponent();
      try {
        return base.pow(e);
      } catch (const std::domain_error& ex) {
        throw ParseError(ex.what(), at);
      }
    }
    return base;
  }

  QPolynomial atom() {
    skip_ws();
    const std::size_t at = pos_;
    const char c = peek();
    if (c == '(') {
      ++pos_;
      QPolynomial inner = expr();
      skip_ws();
      if (peek() != ')') throw ParseError("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    if (c == 'q') {
      ++pos_;
      return QPolynomial::scalar(n_, LaurentPoly::q());
    }
    if (c == 'z') {
      ++pos_;
      if (!std::isdigit(peek())) throw ParseError("expected generator index", pos_);
      long idx = integer();
      if (idx < 1 || idx > n_)
        throw ParseError("generator index out of 1.." + std::to_string(n_), at);
      bool star = false;
      if (peek() == '#') {
        star = true;
        ++pos_;
      }
      return QPolynomial::generator(n_, static_cast<int>(idx), star);
    }
    if (std::isdigit(c)) {
      long v = integer();
      return QPolynomial::scalar(n_, LaurentPoly(Rational(v)));
    }
    throw ParseError(c == '\0' ? "unexpected end of input"
                               : std::string("unexpected character '") + c + "'",
                     pos_);
  }

  int exponent() {
    skip_ws();
    bool paren = false;
    if (peek() == '(') {
      paren = true;
      ++pos_;
      skip_ws();
    }
    bool neg = false;
    if (peek() == '-') {
      neg = true;
      ++pos_;
    }
    if (!std::isdigit(peek())) throw ParseError("expected integer exponent", pos_);
    long v = integer();
    if (v > 64) throw ParseError("exponent too large (max 64)", pos_);
    if (paren) {
      skip_ws();
      if (peek() != ')') throw ParseError("expected ')'", pos_);
      ++pos_;
    }
    return static_cast<int>(neg ? -v : v);
  }

  long integer() {
    long v = 0;
    const std::size_t at = pos_;
    while (std::isdigit(peek())) {
      v = v * 10 + (text_[pos_] - '0');
      if (v > 1'000'000'000L) throw ParseError("integer literal too large", at);
      ++pos_;
    }
    return v;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  std::string_view text_;
  int n_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parse an expression over z1..zn (suffix '#' for the adjoint), q,
/// integers, + - * ^ and parentheses into an un-normalized QPolynomial.
inline QPolynomial parse_expr(std::string_view text, int n) {
  return detail::ExprParser(text, n).parse();
}

}  // namespace qcp
