#pragma once

#include <complex>
#include <map>
#include <stdexcept>

#include "qcp/qpolynomial.hpp"

namespace qcp {

/// A *-polynomial with the deformation parameter substituted: floating
/// complex coefficients on free words.  Bridge from the exact algebra to
/// the numerical representations.
struct EvaluatedPolynomial {
  int n = 1;
  std::map<Word, std::complex<double>, WordLess> terms;
};

inline EvaluatedPolynomial evaluate_at_q(const QPolynomial& p, double q_value) {
  if (!(q_value > 0.0 && q_value < 1.0))
    throw std::domain_error("q must lie in (0,1)");
  EvaluatedPolynomial out;
  out.n = p.n();
  for (const auto& [w, c] : p.terms()) {
    const double v = c.eval(q_value);
    if (v != 0.0) out.terms[w] = std::complex<double>(v, 0.0);
  }
  return out;
}

}  // namespace qcp
