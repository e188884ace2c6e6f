#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qcp/evaluate.hpp>
#include <qcp/parse.hpp>
#include <qcp/rewrite.hpp>
#include <qcp/rng.hpp>

using namespace qcp;

namespace {

Word make_word(std::initializer_list<std::pair<int, bool>> letters) {
  Word w;
  for (auto [g, s] : letters) w.push_back(Letter{g, s});
  return w;
}

QPolynomial z(int n, int j) { return QPolynomial::generator(n, j, false); }
QPolynomial zs(int n, int j) { return QPolynomial::generator(n, j, true); }

Word random_word(DetRng& rng, int n, int len) {
  Word w;
  for (int i = 0; i < len; ++i)
    w.push_back(Letter{static_cast<int>(rng.range(1, n)),
                       rng.next_u64() % 2 == 0});
  return w;
}

QPolynomial random_poly(DetRng& rng, int n, int terms, int max_len) {
  QPolynomial p(n);
  for (int t = 0; t < terms; ++t) {
    const int len = static_cast<int>(rng.range(0, max_len));
    p.add_term(random_word(rng, n, len),
               LaurentPoly::monomial(Rational(rng.range(-5, 5)),
                                     static_cast<int>(rng.range(0, 2))));
  }
  return p;
}

}  // namespace

TEST_CASE("laurent arithmetic is exact and prunes zeros") {
  LaurentPoly a = LaurentPoly(1) - LaurentPoly::q(2);  // 1 - q^2
  LaurentPoly b = LaurentPoly(1) + LaurentPoly::q(2);
  CHECK((a * b) == (LaurentPoly(1) - LaurentPoly::q(4)));
  CHECK((a - a).is_zero());
  CHECK(a.str() == "1-q^2");
  CHECK((-a).str() == "-1+q^2");
  CHECK(LaurentPoly::q(-1).str() == "q^-1");
  CHECK(LaurentPoly::monomial(Rational(3, 2), 3).str() == "3/2*q^3");
  CHECK(LaurentPoly::q(-1).inverse() == LaurentPoly::q(1));
  CHECK(LaurentPoly::monomial(Rational(2), 1).inverse() ==
        LaurentPoly::monomial(Rational(1, 2), -1));
  CHECK_THROWS_AS(a.inverse(), std::domain_error);
  // exactness at a scale where doubles would fail
  LaurentPoly big = LaurentPoly(1);
  for (int i = 0; i < 40; ++i) big *= LaurentPoly(3);
  LaurentPoly third = LaurentPoly(Rational(1, 3));
  for (int i = 0; i < 40; ++i) big *= third;
  CHECK(big == LaurentPoly(1));
}

TEST_CASE("parse_expr: token mapping") {
  // "z2*z1" (n=2) -> word [z2][z1] with coefficient 1
  QPolynomial p = parse_expr("z2*z1", 2);
  CHECK(p.term_count() == 1);
  CHECK(p.coefficient(make_word({{2, false}, {1, false}})) == LaurentPoly(1));

  // "q^2*z1#*z1" -> q^2 [z1*][z1]
  QPolynomial p2 = parse_expr("q^2*z1#*z1", 2);
  CHECK(p2.coefficient(make_word({{1, true}, {1, false}})) == LaurentPoly::q(2));

  // "(1-q^2)*z2#*z2"
  QPolynomial p3 = parse_expr("(1-q^2)*z2#*z2", 2);
  CHECK(p3.coefficient(make_word({{2, true}, {2, false}})) ==
        LaurentPoly(1) - LaurentPoly::q(2));

  CHECK(parse_expr("q^-1", 1) ==
        QPolynomial::scalar(1, LaurentPoly::q(-1)));
  CHECK(parse_expr("q^(-2)", 1) ==
        QPolynomial::scalar(1, LaurentPoly::q(-2)));
  CHECK(parse_expr("z1^2", 1) == z(1, 1) * z(1, 1));
  CHECK(parse_expr("2^-1", 1) ==
        QPolynomial::scalar(1, LaurentPoly(Rational(1, 2))));
}

TEST_CASE("parse_expr: errors carry positions") {
  CHECK_THROWS_AS(parse_expr("z3*z1", 2), ParseError);
  try {
    parse_expr("z1*)", 2);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 3);
  }
  try {
    parse_expr("z5", 2);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 0);
  }
  CHECK_THROWS_AS(parse_expr("z1^-1", 2), ParseError);  // words not invertible
  CHECK_THROWS_AS(parse_expr("", 2), ParseError);
}

TEST_CASE("normal_form: defining relations") {
  // z2 z1 -> q z1 z2
  CHECK(normal_form(parse_expr("z2*z1", 2)) ==
        LaurentPoly::q() * parse_expr("z1*z2", 2));
  // z_n z_n* -> q^2 z_n* z_n
  CHECK(normal_form(parse_expr("z2*z2#", 2)) ==
        LaurentPoly::q(2) * parse_expr("z2#*z2", 2));
  // z1 z1* (n=2) -> q^2 z1* z1 - (1-q^2) z2* z2
  CHECK(normal_form(parse_expr("z1*z1#", 2)) ==
        parse_expr("q^2*z1#*z1 - (1-q^2)*z2#*z2", 2));
  // already normal
  QPolynomial fixed = parse_expr("z1#*z1", 2);
  CHECK(normal_form(fixed) == fixed);
  // idempotence
  DetRng rng(7);
  for (int t = 0; t < 30; ++t) {
    QPolynomial p = random_poly(rng, 3, 3, 5);
    QPolynomial nf = normal_form(p);
    CHECK(normal_form(nf) == nf);
    for (const auto& [w, c] : nf.terms()) CHECK(is_normal_word(w));
  }
}

TEST_CASE("normal_form printing matches the canonical text form") {
  CHECK(normal_form(parse_expr("z2*z1", 2)).str() == "q*z1*z2");
  CHECK(normal_form(parse_expr("z1*z1#", 2)).str() ==
        "q^2*z1#*z1 - (1-q^2)*z2#*z2");
}

TEST_CASE("star: involution and compatibility with normal_form") {
  // star(z1 z2) = z2* z1*
  CHECK(parse_expr("z1*z2", 2).star() == parse_expr("z2#*z1#", 2));
  // star(q z1) = q z1*
  CHECK(parse_expr("q*z1", 2).star() == parse_expr("q*z1#", 2));
  // star(normal_form(z2 z1)) == normal_form(star(z2 z1)) == q z2* z1*
  QPolynomial lhs = normal_form(parse_expr("z2*z1", 2)).star();
  QPolynomial rhs = normal_form(parse_expr("z2*z1", 2).star());
  CHECK(lhs == rhs);
  CHECK(lhs == LaurentPoly::q() * parse_expr("z2#*z1#", 2));

  DetRng rng(11);
  for (int t = 0; t < 30; ++t) {
    QPolynomial p = random_poly(rng, 3, 3, 5);
    CHECK(p.star().star() == p);
    CHECK(normal_form(p.star()) == normal_form(normal_form(p).star()));
  }
}

TEST_CASE("star is an antihomomorphism") {
  DetRng rng(13);
  for (int t = 0; t < 20; ++t) {
    QPolynomial p = random_poly(rng, 3, 2, 4);
    QPolynomial r = random_poly(rng, 3, 2, 4);
    CHECK((p * r).star() == r.star() * p.star());
  }
}

TEST_CASE("build_Q") {
  CHECK(build_Q(2, 2) == parse_expr("z2#*z2", 2));
  CHECK(build_Q(1, 2) == parse_expr("z1#*z1 + z2#*z2", 2));
  CHECK_THROWS_AS(build_Q(3, 2), std::out_of_range);
  for (int n = 1; n <= 4; ++n)
    for (int k = 1; k <= n; ++k) {
      QPolynomial Q = build_Q(k, n);
      CHECK(normal_form(Q - Q.star()).is_zero());  // Q self-adjoint
      CHECK(normal_form(Q) == Q);                  // already normal
    }
}

TEST_CASE("verify_identity: radial commutation relations") {
  const int n = 2;
  // z_k z_k* - q^2 z_k* z_k = -(1-q^2) Q_{k+1}
  {
    QPolynomial lhs = z(n, 1) * zs(n, 1) - LaurentPoly::q(2) * (zs(n, 1) * z(n, 1));
    QPolynomial rhs = -(LaurentPoly(1) - LaurentPoly::q(2)) * build_Q(2, n);
    CHECK(verify_identity(lhs, rhs).holds);
  }
  // z1 Q2 = Q2 z1
  CHECK(verify_identity(z(n, 1) * build_Q(2, n), build_Q(2, n) * z(n, 1)).holds);
  // z2 Q2 = q^2 Q2 z2
  CHECK(verify_identity(z(n, 2) * build_Q(2, n),
                        LaurentPoly::q(2) * (build_Q(2, n) * z(n, 2)))
            .holds);
  // z2 p(Q2) = p(q^2 Q2) z2 with p(X)=X^2
  QPolynomial Q2sq = build_Q(2, n) * build_Q(2, n);
  CHECK(verify_identity(z(n, 2) * Q2sq,
                        LaurentPoly::q(4) * (Q2sq * z(n, 2)))
            .holds);
  // a non-identity has a nonzero residual
  auto bad = verify_identity(z(n, 1) * z(n, 2), z(n, 2) * z(n, 1));
  CHECK(!bad.holds);
  CHECK(!bad.residual.is_zero());
}

TEST_CASE("soundness: normal_form is multiplicative") {
  DetRng rng(17);
  for (int t = 0; t < 25; ++t) {
    QPolynomial p = random_poly(rng, 3, 2, 4);
    QPolynomial r = random_poly(rng, 3, 2, 4);
    CHECK(normal_form(p * r) == normal_form(normal_form(p) * normal_form(r)));
  }
}

TEST_CASE("coefficient ring closure: reductions stay in Z[q]") {
  DetRng rng(19);
  for (int t = 0; t < 60; ++t) {
    const int n = static_cast<int>(rng.range(1, 4));
    Word w = random_word(rng, n, static_cast<int>(rng.range(2, 6)));
    QPolynomial nf = normal_form(QPolynomial::monomial(n, w));
    for (const auto& [word, c] : nf.terms()) {
      CHECK(c.integral());
      CHECK(c.polynomial_in_q());
    }
  }
}

TEST_CASE("rule table: Z[q] coefficients, measure decrease, agreement") {
  for (int n = 1; n <= 4; ++n) {
    const auto rules = rule_table(n);
    for (const RewriteRule& rule : rules) {
      REQUIRE(rule.pattern.size() == 2);
      const auto before = word_measure(rule.pattern);
      for (const auto& [w, c] : rule.replacement.terms()) {
        CHECK(c.integral());
        CHECK(c.polynomial_in_q());
        CHECK(word_measure(w) < before);
      }
      // rewrite_at applies exactly this rule on the bare pattern
      CHECK(rewrite_at(n, rule.pattern, 0) == rule.replacement);
    }
    // one rule per reducible two-letter pattern, none for sorted pairs
    std::size_t reducible = 0;
    for (int a = 0; a < 2 * n; ++a)
      for (int b = 0; b < 2 * n; ++b) {
        const Letter la{a % n + 1, a >= n}, lb{b % n + 1, b >= n};
        if (pair_reducible(la, lb)) ++reducible;
      }
    CHECK(rules.size() == reducible);
  }
}

TEST_CASE("termination: measure decreases and chain depth is bounded") {
  DetRng rng(23);
  for (int t = 0; t < 40; ++t) {
    const int n = static_cast<int>(rng.range(1, 4));
    const int len = static_cast<int>(rng.range(2, 8));
    Word w = random_word(rng, n, len);
    // every single rewrite strictly decreases the measure on each branch
    for (std::size_t pos : all_redexes(w)) {
      const auto before = word_measure(w);
      const QPolynomial step = rewrite_at(n, w, pos);
      for (const auto& [w2, c] : step.terms())
        CHECK(word_measure(w2) < before);
    }
    // chain depth is bounded by the lexicographic measure range
    const long bound = (static_cast<long>(len) * len + 1) *
                       (static_cast<long>(len) * len + 1);
    CHECK(normalization_depth(n, w) <= bound);
  }
}

TEST_CASE("local confluence probe") {
  // word z2 z1 z1*: both first steps meet at one normal form
  {
    Word w = make_word({{2, false}, {1, false}, {1, true}});
    auto redexes = all_redexes(w);
    REQUIRE(redexes.size() == 2);
    QPolynomial a = normal_form(rewrite_at(2, w, redexes[0]));
    QPolynomial b = normal_form(rewrite_at(2, w, redexes[1]));
    CHECK(a == b);
  }
  // n=1: only one rule applies, trivially confluent
  CHECK(check_local_confluence(1, 4).confluent());
  // n=3, words up to length 4 (exhaustive, 6^4 words at the top length)
  ConfluenceReport rep = check_local_confluence(3, 4);
  CHECK(rep.exhaustive);
  CHECK(rep.confluent());
  CHECK(rep.words_checked > 1000);
}

TEST_CASE("evaluate_at_q") {
  const Word w = make_word({{1, false}});
  // (1-q^2) w at q=1/2 -> 0.75 w
  QPolynomial p = QPolynomial::monomial(1, w, LaurentPoly(1) - LaurentPoly::q(2));
  EvaluatedPolynomial e = evaluate_at_q(p, 0.5);
  CHECK(e.terms.at(w).real() == doctest::Approx(0.75).epsilon(1e-15));
  // q^-1 w at q=1/2 -> 2 w
  QPolynomial p2 = QPolynomial::monomial(1, w, LaurentPoly::q(-1));
  CHECK(evaluate_at_q(p2, 0.5).terms.at(w).real() ==
        doctest::Approx(2.0).epsilon(1e-15));
  // normal_form(z2 z1) at q=0.3 -> 0.3 z1 z2
  EvaluatedPolynomial e3 = evaluate_at_q(normal_form(parse_expr("z2*z1", 2)), 0.3);
  CHECK(e3.terms.at(make_word({{1, false}, {2, false}})).real() ==
        doctest::Approx(0.3).epsilon(1e-15));
  CHECK_THROWS_AS(evaluate_at_q(p, 1.5), std::domain_error);
  CHECK_THROWS_AS(evaluate_at_q(p, 0.0), std::domain_error);
}

TEST_CASE("symbolic identity suite across dimensions") {
  for (int n = 1; n <= 3; ++n) {
    for (int k = 1; k <= n; ++k) {
      QPolynomial Qk = build_Q(k, n);
      // (zzQ)
      QPolynomial lhs =
          z(n, k) * zs(n, k) - LaurentPoly::q(2) * (zs(n, k) * z(n, k));
      QPolynomial rhs = k < n ? -(LaurentPoly(1) - LaurentPoly::q(2)) * build_Q(k + 1, n)
                              : QPolynomial::zero(n);
      CHECK(verify_identity(lhs, rhs).holds);
      for (int i = 1; i < k; ++i) {
        CHECK(verify_identity(z(n, i) * Qk, Qk * z(n, i)).holds);
        CHECK(verify_identity(zs(n, i) * Qk, Qk * zs(n, i)).holds);
      }
      for (int j = k; j <= n; ++j) {
        CHECK(verify_identity(z(n, j) * Qk, LaurentPoly::q(2) * (Qk * z(n, j))).holds);
        CHECK(verify_identity(zs(n, j) * Qk, LaurentPoly::q(-2) * (Qk * zs(n, j))).holds);
      }
    }
  }
}
