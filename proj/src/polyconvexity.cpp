#include "hyperfit/polyconvexity.hpp"

#include <stdexcept>

namespace hyperfit {

IndicatorValues indicator(const PotentialModel& m, const InvariantTriplet& t) {
  if (t.i1 <= 0.0 || t.i2 <= 0.0)
    throw std::domain_error("indicator requires positive I1 and I2");
  const Dual2d phi = m.eval(t);
  IndicatorValues v;
  indicator_from_dual(phi, t.i1, t.i2, v.g1, v.g2, v.gj);
  return v;
}

double indicator_penalty(const PotentialModel& m,
                         const std::vector<InvariantTriplet>& points,
                         double weight) {
  if (weight < 0.0) throw std::invalid_argument("penalty weight must be >= 0");
  double p = 0.0;
  for (const auto& t : points) {
    const IndicatorValues v = indicator(m, t);
    p += hinge_sq(v.g1) + hinge_sq(v.g2);
  }
  return weight * p;
}

}  // namespace hyperfit
