#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qcp/cstar.hpp>
#include <qcp/rng.hpp>

using namespace qcp;

namespace {

FunctionExpr radial_decay(int n) {
  FunctionExpr sum = FunctionExpr::coordinate(1);
  for (int j = 2; j <= n; ++j) sum = sum + FunctionExpr::coordinate(j);
  return FunctionExpr::exp_neg(sum);
}

GeneratorTerm coord_term(int n, int j, std::vector<int> l) {
  return GeneratorTerm{FunctionExpr::coordinate(j) * radial_decay(n), std::move(l)};
}

TruncationSpec spec(int n, double q, int N = 6, int M = 5, int d = 2) {
  return TruncationSpec(n, q, N, M, d);
}

FiberSpectrum fibers(std::initializer_list<double> v) {
  FiberSpectrum f;
  f.samples = v;
  return f;
}

// pointwise comparison of two symbols on a deterministic sample of lattice
// atoms (unilateral coordinates live on {q^-1, q^-2, ...}; the last
// coordinate is bilateral)
double symbol_max_diff(const CrossedSymbol& a, const CrossedSymbol& b, double q) {
  const int n = a.n();
  REQUIRE(b.n() == n);
  std::vector<std::vector<int>> keys;
  for (const auto& [m, g] : a.terms()) keys.push_back(m);
  for (const auto& [m, g] : b.terms())
    if (!a.terms().count(m)) keys.push_back(m);
  double worst = 0.0;
  DetRng rng(97);
  for (const auto& m : keys) {
    const auto ita = a.terms().find(m);
    const auto itb = b.terms().find(m);
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<double> t(n);
      for (int j = 0; j < n; ++j) {
        const long e = j == n - 1 ? rng.range(-3, 5) : rng.range(1, 6);
        t[j] = std::pow(q, -(double)e);
      }
      const double va = ita == a.terms().end() ? 0.0 : ita->second.eval(t, q);
      const double vb = itb == b.terms().end() ? 0.0 : itb->second.eval(t, q);
      worst = std::max(worst, std::abs(va - vb));
    }
  }
  return worst;
}

CrossedSymbol random_symbol(DetRng& rng, int n, double q, int max_terms = 2,
                            int max_shift = 2) {
  CrossedSymbol s(n);
  const int terms = 1 + static_cast<int>(rng.below(max_terms));
  for (int t = 0; t < terms; ++t) {
    std::vector<int> m(n);
    for (int j = 0; j < n; ++j)
      m[j] = static_cast<int>(rng.range(-max_shift, max_shift));
    FunctionExpr g = FunctionExpr::constant(rng.uniform(-1.5, 1.5));
    const int which = static_cast<int>(rng.below(4));
    const int axis = 1 + static_cast<int>(rng.below(n));
    if (which == 0)
      g = g * FunctionExpr::exp_neg(FunctionExpr::coordinate(axis));
    else if (which == 1)
      g = g * (FunctionExpr::coordinate(axis) *
               FunctionExpr::exp_neg(FunctionExpr::coordinate(axis)));
    else if (which == 2)
      g = g * FunctionExpr::point_mass(axis, 1 + static_cast<int>(rng.below(3)));
    else
      g = g + FunctionExpr::constant(rng.uniform(-0.5, 0.5));
    s.add_term(m, g);
  }
  return s;
}

}  // namespace

TEST_CASE("function evaluation: guards, indicators, scalings") {
  const double q = 0.5;
  // chi_{I_q}(t) * sqrt(t^2-1) is total thanks to the short-circuit
  FunctionExpr guarded = FunctionExpr::tail_lattice(1) *
                         FunctionExpr::sqrt(FunctionExpr::coordinate(1) *
                                                FunctionExpr::coordinate(1) -
                                            FunctionExpr::constant(1.0));
  std::vector<double> at{0.3};
  CHECK(guarded.eval(at, q) == 0.0);  // 0.3 not in I_q: sqrt never evaluated
  at[0] = 2.0;                        // q^-1
  CHECK(guarded.eval(at, q) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  at[0] = 1.0;  // q^0: below the I_q tail {q^-1, q^-2, ...}
  CHECK(guarded.eval(at, q) == 0.0);

  FunctionExpr bare = FunctionExpr::sqrt(FunctionExpr::coordinate(1) -
                                         FunctionExpr::constant(1.0));
  at[0] = 0.25;
  CHECK_THROWS_AS(bare.eval(at, q), std::domain_error);

  FunctionExpr chi = FunctionExpr::point_mass(1, 2);
  at[0] = 4.0;
  CHECK(chi.eval(at, q) == 1.0);
  at[0] = 2.0;
  CHECK(chi.eval(at, q) == 0.0);

  CHECK(FunctionExpr::q_power(-2).eval(at, q) == doctest::Approx(4.0));
}

TEST_CASE("coordinate scalings transport indicators and compose") {
  const double q = 0.5;
  FunctionExpr g = FunctionExpr::coordinate(1) * FunctionExpr::point_mass(1, 1);
  FunctionExpr moved = g.scaled(1, 1);  // t -> q t
  // g(q t): the indicator now fires at t = q^-2
  std::vector<double> at{4.0};
  CHECK(moved.eval(at, q) == doctest::Approx(2.0));  // q * 4 = 2, chi(q*4 = q^-1) = 1
  at[0] = 2.0;
  CHECK(moved.eval(at, q) == 0.0);
  // sigma then its inverse is the identity
  FunctionExpr roundtrip = moved.scaled(1, -1);
  DetRng rng(3);
  for (int i = 0; i < 20; ++i) {
    at[0] = std::pow(q, -(double)rng.range(0, 6));
    CHECK(roundtrip.eval(at, q) == doctest::Approx(g.eval(at, q)).epsilon(1e-14));
  }
  // tail indicator: sigma_1^1 turns chi_{I_q} into the deeper tail
  FunctionExpr tail = FunctionExpr::tail_lattice(1).scaled(1, 1);
  at[0] = 2.0;  // q*t = 1 = q^0: below the tail
  CHECK(tail.eval(at, q) == 0.0);
  at[0] = 4.0;  // q*t = q^-1
  CHECK(tail.eval(at, q) == 1.0);
}

TEST_CASE("function parser") {
  const double q = 0.5;
  FunctionExpr f = parse_function("r1*exp(-(r1+r2))", 2);
  std::vector<double> at{2.0, 1.0};
  CHECK(f.eval(at, q) == doctest::Approx(2.0 * std::exp(-3.0)).epsilon(1e-14));
  FunctionExpr g = parse_function("chi(1,1)*sqrt(r1^2-1)", 2);
  CHECK(g.eval(at, q) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
  FunctionExpr h = parse_function("q^1*r1 + 0.25", 1);
  std::vector<double> one{1.0};
  CHECK(h.eval(one, q) == doctest::Approx(0.75));
  CHECK_THROWS_AS(parse_function("r3", 2), std::invalid_argument);
  CHECK_THROWS_AS(parse_function("exp(r1", 2), std::invalid_argument);
}

TEST_CASE("vanishing condition: sampled enforcement") {
  const double q = 0.5;
  // f = r1 exp(-(r1+r2)) vanishes at r1 = 0: acceptable with l_1 != 0
  GeneratorTerm good = coord_term(2, 1, {1, 0});
  CHECK_NOTHROW(enforce_vanishing(good, 2, q));
  // f = exp(-(r1+r2)) does not vanish at r1 = 0: rejected
  GeneratorTerm bad{radial_decay(2), {1, 0}};
  CHECK_THROWS_AS(enforce_vanishing(bad, 2, q), TermRejected);
  // but the same f with l = 0 is fine
  GeneratorTerm diag{radial_decay(2), {0, 0}};
  CHECK_NOTHROW(enforce_vanishing(diag, 2, q));
  // a term failing only in the second coordinate
  GeneratorTerm bad2{FunctionExpr::coordinate(1) * radial_decay(2), {1, 1}};
  CHECK_THROWS_AS(enforce_vanishing(bad2, 2, q), TermRejected);
}

TEST_CASE("C0 decay spot check") {
  const double q = 0.5;
  GeneratorTerm flat{FunctionExpr::constant(1.0), {0, 0}};
  std::string why;
  CHECK(!c0_spot_check(flat, 2, q, 6, &why));
  CHECK(!why.empty());
  GeneratorTerm decaying{radial_decay(2), {0, 0}};
  CHECK(c0_spot_check(decaying, 2, q, 6));
  GeneratorTerm poly{coord_term(2, 1, {0, 0})};
  CHECK(c0_spot_check(poly, 2, q, 6));
}

TEST_CASE("pi_0: evaluation at the origin") {
  const double q = 0.5;
  TruncationSpec t = spec(2, q);
  RepComponent rep0 = build_component_abstract(0, t, fibers({}));
  // l = 0: the scalar f(0,..,0)
  GeneratorTerm c{FunctionExpr::constant(0.0) - radial_decay(2), {0, 0}};
  SparseOperator op = pi_k(c, rep0);
  CHECK(op.dim() == 1);
  CHECK(op.at(0, 0) == Complex(-1.0));  // -exp(0)
  // any l != 0: the zero operator (and f must vanish on that axis)
  GeneratorTerm shifted = coord_term(2, 1, {1, 0});
  CHECK(pi_k(shifted, rep0).nnz() == 0);
}

TEST_CASE("pi_n of a pure multiplication generator is the lattice diagonal") {
  const double q = 0.5;
  const int n = 2;
  TruncationSpec t = spec(n, q);
  RepComponent rep = build_component_abstract(n, t, fibers({0.75, 1.0}));
  GeneratorTerm term{FunctionExpr::coordinate(n) *
                         FunctionExpr::exp_neg(FunctionExpr::coordinate(n)),
                     {0, 0}};
  SparseOperator op = pi_k(term, rep);
  CHECK(op.is_diagonal());
  for (std::size_t ord = 0; ord < rep.dim(); ++ord) {
    const double tn = rep.atom(ord)[n - 1];
    CHECK(op.at(ord, ord).real() ==
          doctest::Approx(tn * std::exp(-tn)).epsilon(1e-14));
  }
}

TEST_CASE("pi_k kills shifts beyond the component") {
  const double q = 0.5;
  TruncationSpec t = spec(2, q);
  RepComponent rep1 = build_component_abstract(1, t, fibers({1.0}));
  GeneratorTerm term = coord_term(2, 2, {0, 1});  // l_2 != 0, k = 1 < 2
  CHECK(pi_k(term, rep1).nnz() == 0);
}

TEST_CASE("pi_k is *-compatible") {
  const double q = 0.4;
  const int n = 2;
  TruncationSpec t = spec(n, q);
  ComponentFamily fam = ComponentFamily::build(t, fibers({0.6, 1.0}));
  DetRng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    // random term with vanishing-compatible support
    std::vector<int> l(n, 0);
    FunctionExpr f = radial_decay(n);
    for (int j = 1; j <= n; ++j)
      if (rng.below(2)) {
        l[j - 1] = static_cast<int>(rng.range(-2, 2));
        if (l[j - 1] != 0) f = f * FunctionExpr::coordinate(j);
      }
    GeneratorTerm term{f, l};
    for (const RepComponent& rep : fam.blocks) {
      SparseOperator a = pi_k(term.star(), rep);
      SparseOperator b = pi_k(term, rep).adjoint();
      CHECK((a - b).max_abs() <= 1e-12);
    }
    GeneratorTerm twice = term.star().star();
    CHECK(twice.starred == term.starred);
  }
}

TEST_CASE("n=1: the construction degenerates to diagonal times bilateral shift") {
  const double q = 0.5;
  TruncationSpec t(1, q, 6, 4, 1);
  RepComponent rep = build_component_abstract(1, t, fibers({0.8, 1.0}));
  GeneratorTerm term{FunctionExpr::coordinate(1) *
                         FunctionExpr::exp_neg(FunctionExpr::coordinate(1)),
                     {1}};
  SparseOperator op = pi_k(term, rep);
  // hand-built: diag(f(t)) * S where S raises the bilateral index
  const int M = 4, B = 2 * M + 1;
  SparseOperator hand(rep.dim());
  for (int s = 0; s < 2; ++s)
    for (int i = -M; i < M; ++i) {
      const std::size_t src = s * B + (i + M);
      const double t_target = rep.fibers()[s] * std::pow(q, -(i + 1));
      hand.set(src + 1, src, t_target * std::exp(-t_target));
    }
  CHECK((op - hand).max_abs() <= 1e-14);
}

TEST_CASE("represent: block-diagonal sum over all components") {
  const double q = 0.5;
  const int n = 2;
  TruncationSpec t = spec(n, q);
  ComponentFamily fam = ComponentFamily::build(t, fibers({0.9, 1.0}));
  // constant c with l = 0 is not C0 but represents as c * identity
  std::vector<GeneratorTerm> cterm{{FunctionExpr::constant(0.5), {0, 0}}};
  SparseOperator op = represent(cterm, fam);
  std::size_t dim = 0;
  for (const auto& b : fam.blocks) dim += b.dim();
  CHECK(op.dim() == dim);
  CHECK((op - SparseOperator::identity(dim).scaled(0.5)).max_abs() == 0.0);
  // adjoint compatibility at the direct-sum level
  std::vector<GeneratorTerm> term{coord_term(n, 1, {1, 0})};
  std::vector<GeneratorTerm> starred{term[0].star()};
  CHECK((represent(starred, fam) - represent(term, fam).adjoint()).max_abs() <=
        1e-12);
}

TEST_CASE("symbol calculus: shift relations") {
  const double q = 0.5;
  const int n = 2;
  // S_1 S_1* = 1 - chi_{q^{-1}}(t_1)
  CrossedSymbol s1 = CrossedSymbol::shift(n, 1, 1);
  CrossedSymbol s1s = CrossedSymbol::shift(n, 1, -1);
  CrossedSymbol defect = symbol_multiply(s1, s1s);
  REQUIRE(defect.terms().size() == 1);
  const auto& [m0, g0] = *defect.terms().begin();
  CHECK(m0 == std::vector<int>(n, 0));
  std::vector<double> at{2.0, 1.0};  // t_1 = q^-1
  CHECK(g0.eval(at, q) == 0.0);
  at[0] = 4.0;
  CHECK(g0.eval(at, q) == 1.0);
  // S_1* S_1 = 1
  CrossedSymbol unit = symbol_multiply(s1s, s1);
  REQUIRE(unit.terms().size() == 1);
  CHECK(unit.terms().begin()->second.eval(at, q) == 1.0);
  // the unitary coordinate cancels both ways
  CrossedSymbol sn = CrossedSymbol::shift(n, n, 1);
  CrossedSymbol snb = CrossedSymbol::shift(n, n, -1);
  CHECK(symbol_multiply(sn, snb).terms().begin()->second.eval(at, q) == 1.0);
  CHECK(symbol_multiply(snb, sn).terms().begin()->second.eval(at, q) == 1.0);
}

TEST_CASE("symbol calculus: functions commute past shifts by scaling") {
  const double q = 0.5;
  const int n = 1;
  FunctionExpr f = FunctionExpr::exp_neg(FunctionExpr::coordinate(1));
  FunctionExpr g = FunctionExpr::coordinate(1);
  CrossedSymbol x = CrossedSymbol::function(n, f);
  CrossedSymbol sy =
      symbol_multiply(CrossedSymbol::shift(n, 1, 1), CrossedSymbol::function(n, g));
  CrossedSymbol prod = symbol_multiply(x, sy);
  REQUIRE(prod.terms().size() == 1);
  const auto& [m, coeff] = *prod.terms().begin();
  CHECK(m == std::vector<int>{1});
  // f(t) * g(q t)
  std::vector<double> at{4.0};
  CHECK(coeff.eval(at, q) == doctest::Approx(std::exp(-4.0) * 2.0).epsilon(1e-14));
}

TEST_CASE("symbol star is an involution and associativity holds") {
  const double q = 0.5;
  DetRng rng(23);
  for (int n : {1, 2, 3})
    for (int trial = 0; trial < 8; ++trial) {
      CrossedSymbol x = random_symbol(rng, n, q);
      CrossedSymbol y = random_symbol(rng, n, q);
      CrossedSymbol z = random_symbol(rng, n, q);
      CHECK(symbol_max_diff(x.star().star(), x, q) <= 1e-12);
      CrossedSymbol left = symbol_multiply(symbol_multiply(x, y), z);
      CrossedSymbol right = symbol_multiply(x, symbol_multiply(y, z));
      CHECK(symbol_max_diff(left, right, q) <= 1e-12);
    }
}

TEST_CASE("symbol_vs_matrix on the top component") {
  const double q = 0.5;
  for (int n : {1, 2, 3}) {
    TruncationSpec t(n, q, 7, 7, 3);
    RepComponent rep = build_component_abstract(n, t, fibers({0.9, 1.0}));
    // commuting diagonal symbols deviate by nothing
    CrossedSymbol f = CrossedSymbol::function(
        n, FunctionExpr::exp_neg(FunctionExpr::coordinate(n)));
    CrossedSymbol g = CrossedSymbol::function(n, FunctionExpr::coordinate(n));
    CHECK(symbol_vs_matrix(f, g, rep) <= 1e-13);
    // defect indicator matches the missing range of the unilateral shift
    if (n >= 2) {
      CrossedSymbol s1 = CrossedSymbol::shift(n, 1, 1);
      CHECK(symbol_vs_matrix(s1, s1.star(), rep) <= 1e-12);
    }
    DetRng rng(41 + n);
    for (int trial = 0; trial < 12; ++trial) {
      CrossedSymbol x = random_symbol(rng, n, q);
      CrossedSymbol y = random_symbol(rng, n, q);
      CHECK(symbol_vs_matrix(x, y, rep) <= 1e-10);
    }
  }
}

TEST_CASE("mixed powers on the bilateral coordinate of pi_k, k < n") {
  // documented probe: the pi_n defect indicator chi_{q^{-1}}(t_k) acts
  // nontrivially on the bilateral coordinate of component k < n, so the
  // symbolic product is NOT multiplicative there; products in the full
  // algebra are matrix-wise per component
  const double q = 0.5;
  const int n = 2;
  TruncationSpec t(n, q, 7, 7, 3);
  RepComponent rep1 = build_component_abstract(1, t, fibers({1.0}));
  CrossedSymbol s1 = CrossedSymbol::shift(n, 1, 1);
  const double dev = symbol_vs_matrix(s1, s1.star(), rep1);
  CHECK(dev > 0.5);  // the S S* defect is wrong on a bilateral coordinate
}

TEST_CASE("norm_estimate: exact diagonals and monotone sweeps") {
  const double q = 0.5;
  const int n = 1;
  FiberSpectrum f = fibers({0.6, 1.0});
  std::vector<TruncationSpec> sweep;
  for (int w : {4, 6, 8}) sweep.push_back(TruncationSpec(n, q, w, w, 1));

  // pure multiplication: equals the lattice max of |f| exactly
  std::vector<GeneratorTerm> mult{{FunctionExpr::coordinate(1) *
                                       FunctionExpr::exp_neg(FunctionExpr::coordinate(1)),
                                   {0}}};
  auto rows = norm_estimate(mult, f, sweep);
  REQUIRE(rows.size() == sweep.size());
  for (const auto& row : rows) {
    // independent oracle: max of |t e^{-t}| over the block atoms
    double expect = std::abs(0.0 * std::exp(-0.0));  // the pi_0 block value
    const int M = sweep[row.sweep_index].bilateral_max;
    for (double a : f.samples)
      for (int i = -M; i <= M; ++i) {
        const double tv = a * std::pow(q, -i);
        expect = std::max(expect, std::abs(tv * std::exp(-tv)));
      }
    CHECK(row.sup_lb == expect);  // bitwise: same evaluations on both routes
  }
  // t e^{-t} peaks at t = 1, attained because 1.0 is a fiber sample
  CHECK(rows.back().sup_lb == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

  // exp(-r): atoms accumulate at 0, the bound climbs toward 1
  std::vector<GeneratorTerm> expd{{FunctionExpr::exp_neg(FunctionExpr::coordinate(1)), {0}}};
  auto rows2 = norm_estimate(expd, f, sweep);
  CHECK(rows2[0].sup_lb <= rows2[1].sup_lb);
  CHECK(rows2[1].sup_lb <= rows2[2].sup_lb);
  CHECK(rows2[2].sup_lb > 0.98);

  // shifted generators: certified lower bounds, monotone along the sweep
  std::vector<GeneratorTerm> shifted{coord_term(1, 1, {1}), coord_term(1, 1, {-2})};
  auto rows3 = norm_estimate(shifted, f, sweep);
  for (std::size_t ti = 0; ti < shifted.size(); ++ti) {
    double prev = 0.0;
    for (const auto& row : rows3)
      if (row.term_id == ti) {
        CHECK(row.sup_lb >= prev);
        prev = row.sup_lb;
      }
  }

  // f = 1 is not C0: rejected
  std::vector<GeneratorTerm> flat{{FunctionExpr::constant(1.0), {0}}};
  CHECK_THROWS_AS(norm_estimate(flat, f, sweep), TermRejected);
}

TEST_CASE("classical separation") {
  const double q = 0.5;
  const int n = 2;
  std::vector<GeneratorTerm> l0_family{
      {radial_decay(n), {0, 0}},
      {coord_term(n, 1, {0, 0})},
      {coord_term(n, 2, {0, 0})},
  };
  std::vector<GeneratorTerm> full = l0_family;
  full.push_back(coord_term(n, 1, {1, 0}));
  full.push_back(coord_term(n, 2, {0, 1}));

  const PolarPoint origin{{0.0, 0.0}, {0.0, 0.0}};
  const PolarPoint e1{{1.0, 0.0}, {0.0, 0.0}};
  // same moduli, phases differ in the first coordinate
  const PolarPoint p{{1.0, 0.5}, {0.0, 0.0}};
  const PolarPoint p_rot{{1.0, 0.5}, {1.3, 0.0}};
  // zero first coordinate: its phase is immaterial
  const PolarPoint z0{{0.0, 0.7}, {0.2, 0.1}};
  const PolarPoint z0_rot{{0.0, 0.7}, {2.9, 0.1}};

  std::vector<std::pair<PolarPoint, PolarPoint>> pairs{
      {origin, e1}, {p, p_rot}, {z0, z0_rot}};

  SeparationReport only_moduli = classical_separation(pairs, l0_family, n, q);
  CHECK(only_moduli.unseparated == std::vector<std::size_t>{1, 2});

  SeparationReport with_phases = classical_separation(pairs, full, n, q);
  // the phase pair is now separated; the zero-coordinate phase pair must
  // remain indistinguishable (well-definedness of the vanishing condition)
  CHECK(with_phases.unseparated == std::vector<std::size_t>{2});
}
