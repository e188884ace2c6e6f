#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qcp {

/// Symbolic real-valued function on R_+^n.  The node set is closed under
/// the coordinate q-scalings r_j -> q^m r_j, so shift commutation stays
/// inside the type:
///   - constants and powers of q,
///   - scaled coordinates q^p r_j,
///   - + - *, sqrt, exp(-.),
///   - point indicator of {q^-m} in coordinate j,
///   - tail indicator of {q^-l : l >= c} in coordinate j.
/// Multiplication short-circuits on an exactly zero left factor, so
/// indicator-guarded square roots (chi * sqrt(t^2-1)) are total.
class FunctionExpr {
 public:
  enum class Kind {
    constant,
    q_power,
    coordinate,
    add,
    sub,
    mul,
    square_root,
    exp_neg,
    point_mass,
    tail_lattice,
  };

  FunctionExpr() : FunctionExpr(constant(0.0)) {}

  static FunctionExpr constant(double v) {
    Node n;
    n.kind = Kind::constant;
    n.value = v;
    return FunctionExpr(std::move(n));
  }

  static FunctionExpr q_power(int p) {
    Node n;
    n.kind = Kind::q_power;
    n.level = p;
    return FunctionExpr(std::move(n));
  }

  /// q^{scale} * r_axis (axis 1-based).
  static FunctionExpr coordinate(int axis, int scale = 0) {
    check_axis(axis);
    Node n;
    n.kind = Kind::coordinate;
    n.axis = axis;
    n.level = scale;
    return FunctionExpr(std::move(n));
  }

  static FunctionExpr sqrt(FunctionExpr a) {
    return unary(Kind::square_root, std::move(a));
  }

  /// exp(-a)
  static FunctionExpr exp_neg(FunctionExpr a) {
    return unary(Kind::exp_neg, std::move(a));
  }

  /// chi_{q^{-m}}(r_axis)
  static FunctionExpr point_mass(int axis, int m) {
    check_axis(axis);
    Node n;
    n.kind = Kind::point_mass;
    n.axis = axis;
    n.level = m;
    return FunctionExpr(std::move(n));
  }

  /// chi of {q^{-l} : l >= min_level} in r_axis; min_level = 1 is chi_{I_q}.
  static FunctionExpr tail_lattice(int axis, int min_level = 1) {
    check_axis(axis);
    Node n;
    n.kind = Kind::tail_lattice;
    n.axis = axis;
    n.level = min_level;
    return FunctionExpr(std::move(n));
  }

  friend FunctionExpr operator+(FunctionExpr a, FunctionExpr b) {
    return binary(Kind::add, std::move(a), std::move(b));
  }
  friend FunctionExpr operator-(FunctionExpr a, FunctionExpr b) {
    return binary(Kind::sub, std::move(a), std::move(b));
  }
  friend FunctionExpr operator*(FunctionExpr a, FunctionExpr b) {
    return binary(Kind::mul, std::move(a), std::move(b));
  }

  Kind kind() const { return node_->kind; }

  /// sigma_axis^m: substitute r_axis -> q^m r_axis.
  FunctionExpr scaled(int axis, int m) const {
    check_axis(axis);
    if (m == 0) return *this;
    const Node& n = *node_;
    switch (n.kind) {
      case Kind::constant:
      case Kind::q_power:
        return *this;
      case Kind::coordinate:
        return n.axis == axis ? coordinate(n.axis, n.level + m) : *this;
      case Kind::point_mass:
        return n.axis == axis ? point_mass(n.axis, n.level + m) : *this;
      case Kind::tail_lattice:
        return n.axis == axis ? tail_lattice(n.axis, n.level + m) : *this;
      case Kind::square_root:
      case Kind::exp_neg: {
        FunctionExpr child(n.a);
        return unary(n.kind, child.scaled(axis, m));
      }
      default: {
        FunctionExpr left(n.a), right(n.b);
        return binary(n.kind, left.scaled(axis, m), right.scaled(axis, m));
      }
    }
  }

  /// sigma^l over all coordinates: r_j -> q^{l_j} r_j.
  FunctionExpr scaled(std::span<const int> powers) const {
    FunctionExpr f = *this;
    for (std::size_t j = 0; j < powers.size(); ++j)
      f = f.scaled(static_cast<int>(j) + 1, powers[j]);
    return f;
  }

  double eval(std::span<const double> r, double q) const { return eval_node(*node_, r, q); }

  int max_axis() const { return max_axis_node(*node_); }

  std::string str() const { return str_node(*node_); }

 private:
  struct Node {
    Kind kind = Kind::constant;
    double value = 0.0;
    int axis = 0;
    int level = 0;
    std::shared_ptr<const Node> a, b;
  };

  explicit FunctionExpr(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}
  explicit FunctionExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static void check_axis(int axis) {
    if (axis < 1) throw std::invalid_argument("coordinate axis must be >= 1");
  }

  static FunctionExpr unary(Kind k, FunctionExpr a) {
    Node n;
    n.kind = k;
    n.a = a.node_;
    return FunctionExpr(std::move(n));
  }

  static FunctionExpr binary(Kind k, FunctionExpr a, FunctionExpr b) {
    Node n;
    n.kind = k;
    n.a = a.node_;
    n.b = b.node_;
    return FunctionExpr(std::move(n));
  }

  static double coord_value(const Node& n, std::span<const double> r) {
    if (n.axis > static_cast<int>(r.size()))
      throw std::out_of_range("function references coordinate beyond the point");
    return r[n.axis - 1];
  }

  static double eval_node(const Node& n, std::span<const double> r, double q) {
    switch (n.kind) {
      case Kind::constant:
        return n.value;
      case Kind::q_power:
        return std::pow(q, n.level);
      case Kind::coordinate:
        return std::pow(q, n.level) * coord_value(n, r);
      case Kind::add:
        return eval_node(*n.a, r, q) + eval_node(*n.b, r, q);
      case Kind::sub:
        return eval_node(*n.a, r, q) - eval_node(*n.b, r, q);
      case Kind::mul: {
        const double left = eval_node(*n.a, r, q);
        if (left == 0.0) return 0.0;  // guards chi * sqrt(t^2 - 1)
        return left * eval_node(*n.b, r, q);
      }
      case Kind::square_root: {
        double v = eval_node(*n.a, r, q);
        if (v < 0.0) {
          if (v < -1e-12)
            throw std::domain_error("sqrt of a negative subexpression");
          v = 0.0;
        }
        return std::sqrt(v);
      }
      case Kind::exp_neg:
        return std::exp(-eval_node(*n.a, r, q));
      case Kind::point_mass: {
        const double t = coord_value(n, r);
        const double target = std::pow(q, -n.level);
        return std::abs(t - target) <= 1e-9 * std::max(1.0, target) ? 1.0 : 0.0;
      }
      case Kind::tail_lattice: {
        const double t = coord_value(n, r);
        if (!(t > 0.0)) return 0.0;
        const double raw = std::log(t) / -std::log(q);
        const long level = std::lround(raw);
        if (level < n.level) return 0.0;
        const double target = std::pow(q, -static_cast<double>(level));
        return std::abs(t - target) <= 1e-9 * target ? 1.0 : 0.0;
      }
    }
    throw std::logic_error("unreachable");
  }

  static int max_axis_node(const Node& n) {
    int m = n.axis;
    if (n.a) m = std::max(m, max_axis_node(*n.a));
    if (n.b) m = std::max(m, max_axis_node(*n.b));
    return m;
  }

  static std::string str_node(const Node& n) {
    const auto coord = [&](const Node& c) {
      std::string s = "r" + std::to_string(c.axis);
      if (c.level != 0) s = "q^" + std::to_string(c.level) + "*" + s;
      return s;
    };
    switch (n.kind) {
      case Kind::constant: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", n.value);
        return buf;
      }
      case Kind::q_power:
        return n.level == 1 ? "q" : "q^" + std::to_string(n.level);
      case Kind::coordinate:
        return coord(n);
      case Kind::add:
        return "(" + str_node(*n.a) + "+" + str_node(*n.b) + ")";
      case Kind::sub:
        return "(" + str_node(*n.a) + "-" + str_node(*n.b) + ")";
      case Kind::mul:
        return str_node(*n.a) + "*" + str_node(*n.b);
      case Kind::square_root:
        return "sqrt(" + str_node(*n.a) + ")";
      case Kind::exp_neg:
        return "exp(-" + str_node(*n.a) + ")";
      case Kind::point_mass:
        return "chi(" + std::to_string(n.level) + ",r" + std::to_string(n.axis) + ")";
      case Kind::tail_lattice:
        return "chiTail(" + std::to_string(n.level) + ",r" + std::to_string(n.axis) + ")";
    }
    return "?";
  }

  std::shared_ptr<const Node> node_;
};

/// Parser for generator-term function strings: r1..rn, q, decimal
/// constants, + - * ^ (non-negative integer powers), sqrt(e), exp(e)
/// (stored as exp(-(-e))), chi(m, j) for the point indicator at q^-m in
/// r_j, and parentheses.
FunctionExpr parse_function(std::string_view text, int n);

namespace fdetail {

class FunctionParser {
 public:
  FunctionParser(std::string_view text, int n) : text_(text), n_(n) {}

  FunctionExpr parse() {
    FunctionExpr f = expr();
    skip_ws();
    if (pos_ != text_.size())
      throw std::invalid_argument("trailing input in function at offset " +
                                  std::to_string(pos_));
    return f;
  }

 private:
  FunctionExpr expr() {
    skip_ws();
    bool neg = false;
    if (peek() == '-') {
      neg = true;
      ++pos_;
    }
    FunctionExpr acc = term();
    if (neg) acc = FunctionExpr::constant(0.0) - acc;
    for (;;) {
      skip_ws();
      if (peek() == '+') {
        ++pos_;
        acc = acc + term();
      } else if (peek() == '-') {
        ++pos_;
        acc = acc - term();
      } else {
        return acc;
      }
    }
  }

  FunctionExpr term() {
    FunctionExpr acc = factor();
    for (;;) {
      skip_ws();
      if (peek() == '*') {
        ++pos_;
        acc = acc * factor();
      } else {
        return acc;
      }
    }
  }

  FunctionExpr factor() {
    FunctionExpr base = atom();
    skip_ws();
    if (peek() == '^') {
      ++pos_;
      skip_ws();
      const long e = integer();
      if (e < 0 || e > 16) throw std::invalid_argument("power must be in 0..16");
      FunctionExpr acc = FunctionExpr::constant(1.0);
      for (long i = 0; i < e; ++i) acc = acc * base;
      return acc;
    }
    return base;
  }

  FunctionExpr atom() {
    skip_ws();
    if (peek() == '(') {
      ++pos_;
      FunctionExpr inner = expr();
      expect(')');
      return inner;
    }
    if (match("sqrt(")) {
      FunctionExpr inner = expr();
      expect(')');
      return FunctionExpr::sqrt(inner);
    }
    if (match("exp(")) {
      FunctionExpr inner = expr();
      expect(')');
      return FunctionExpr::exp_neg(FunctionExpr::constant(0.0) - inner);
    }
    if (match("chi(")) {
      const long m = integer();
      skip_ws();
      expect(',');
      skip_ws();
      const long j = integer();
      expect(')');
      if (j < 1 || j > n_) throw std::invalid_argument("chi coordinate out of range");
      return FunctionExpr::point_mass(static_cast<int>(j), static_cast<int>(m));
    }
    if (peek() == 'r') {
      ++pos_;
      const long j = integer();
      if (j < 1 || j > n_)
        throw std::invalid_argument("coordinate r" + std::to_string(j) +
                                    " out of range 1.." + std::to_string(n_));
      return FunctionExpr::coordinate(static_cast<int>(j));
    }
    if (peek() == 'q') {
      ++pos_;
      return FunctionExpr::q_power(1);
    }
    if (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')
      return FunctionExpr::constant(number());
    throw std::invalid_argument("unexpected character in function at offset " +
                                std::to_string(pos_));
  }

  bool match(const char* kw) {
    std::string_view k(kw);
    if (text_.substr(pos_).starts_with(k)) {
      pos_ += k.size();
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c)
      throw std::invalid_argument(std::string("expected '") + c + "' at offset " +
                                  std::to_string(pos_));
    ++pos_;
  }

  long integer() {
    skip_ws();
    bool neg = false;
    if (peek() == '-') {
      neg = true;
      ++pos_;
    }
    if (!std::isdigit(static_cast<unsigned char>(peek())))
      throw std::invalid_argument("expected integer at offset " + std::to_string(pos_));
    long v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + (text_[pos_] - '0');
      ++pos_;
    }
    return neg ? -v : v;
  }

  double number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
            text_[pos_] == 'e' || text_[pos_] == 'E' ||
            ((text_[pos_] == '+' || text_[pos_] == '-') && pos_ > start &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
      ++pos_;
    return std::stod(std::string(text_.substr(start, pos_ - start)));
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

}  // namespace fdetail

inline FunctionExpr parse_function(std::string_view text, int n) {
  return fdetail::FunctionParser(text, n).parse();
}

}  // namespace qcp
