#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qcp {

/// Finite window for the representation lattices: unilateral indices run
/// over 1..unilateral_max, the bilateral index over -bilateral_max..
/// bilateral_max.  Basis vectors at distance >= interior_margin from every
/// bound form the interior set, on which all verified relations must hold.
struct TruncationSpec {
  int n;
  double q;
  int unilateral_max;   // N
  int bilateral_max;    // M
  int interior_margin;  // d

  TruncationSpec(int n_, double q_, int uni, int bi, int margin)
      : n(n_), q(q_), unilateral_max(uni), bilateral_max(bi),
        interior_margin(margin) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0,1)");
    if (uni < 2) throw std::invalid_argument("unilateral_max must be >= 2");
    if (bi < 1) throw std::invalid_argument("bilateral_max must be >= 1");
    // margin 0 is allowed so boundary artifacts can be exhibited on purpose
    if (margin < 0 || margin >= std::min(uni, bi))
      throw std::invalid_argument("interior margin must satisfy 0 <= d < min(N,M)");
  }
};

/// Samples of the fiber operator spectrum; every sample must lie in (q, 1]
/// with q itself excluded.
struct FiberSpectrum {
  std::vector<double> samples;

  static FiberSpectrum filtered(std::vector<double> candidates, double q) {
    FiberSpectrum f;
    for (double a : candidates)
      if (a > q && a <= 1.0) f.samples.push_back(a);
    return f;
  }

  void validate(double q) const {
    if (samples.empty()) throw std::invalid_argument("fiber spectrum is empty");
    for (double a : samples)
      if (!(a > q && a <= 1.0))
        throw std::invalid_argument("fiber sample outside (q,1]");
  }
};

/// Atoms of a q-invariant measure restricted to (q,1], with one positive
/// weight per orbit {s * q^-i : i in Z}.  Weights do not enter operator
/// matrices (shifts never mix orbits and are weight-neutral along an
/// orbit); they are carried for measure bookkeeping.
struct MeasureSpec {
  std::vector<double> samples;
  std::vector<double> weights;

  static MeasureSpec equal_weight(std::vector<double> samples) {
    MeasureSpec m;
    m.weights.assign(samples.size(), 1.0);
    m.samples = std::move(samples);
    return m;
  }

  void validate(double q) const {
    if (samples.empty()) throw std::invalid_argument("measure has no atoms");
    if (weights.size() != samples.size())
      throw std::invalid_argument("weights/samples size mismatch");
    for (double s : samples)
      if (!(s > q && s <= 1.0))
        throw std::invalid_argument("measure atom outside (q,1]");
    for (double w : weights)
      if (!(w > 0.0)) throw std::invalid_argument("weights must be positive");
  }
};

/// Position in the enumerated basis of one component: fiber sample id plus
/// the multi-index (i_1..i_{k-1} unilateral, i_k bilateral).  For the k=0
/// component both are empty.
struct BasisIndex {
  int component = 0;
  int fiber = 0;
  std::vector<int> levels;
};

}  // namespace qcp
