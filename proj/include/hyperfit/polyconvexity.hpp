#ifndef HYPERFIT_POLYCONVEXITY_HPP
#define HYPERFIT_POLYCONVEXITY_HPP

#include <vector>

#include "hyperfit/potential.hpp"

namespace hyperfit {

// Reduced polyconvexity indicator.  Satisfaction means g >= 0; negative
// values flag a violation of the corresponding inequality.
struct IndicatorValues {
  double g1;  // phi_,I1I1 + 3/(2 I1) phi_,I1
  double g2;  // phi_,I2I2 + 3/(2 I2) phi_,I2
  double gj;  // phi_,JJ
};

IndicatorValues indicator(const PotentialModel& m, const InvariantTriplet& t);

// Squared-hinge penalty over the I1 and I2 inequalities; the J inequality is
// omitted because convex-in-J architectures satisfy it automatically.
double indicator_penalty(const PotentialModel& m,
                         const std::vector<InvariantTriplet>& points,
                         double weight);

// Indicator left-hand sides from an already-evaluated energy dual, generic in
// the scalar so penalties stay differentiable in model parameters.
template <class T>
void indicator_from_dual(const Dual2<T>& phi, double i1, double i2,
                         T& g1, T& g2, T& gj) {
  g1 = phi.h[hess_index(0, 0)] + (1.5 / i1) * phi.g[0];
  g2 = phi.h[hess_index(1, 1)] + (1.5 / i2) * phi.g[1];
  gj = phi.h[hess_index(2, 2)];
}

template <class T>
T hinge_sq(const T& g) {
  if (val(g) >= 0.0) return T(0.0);
  return g * g;
}

}  // namespace hyperfit

#endif
