#include "hyperfit/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hyperfit {

InvariantTriplet invariants_of(const DefGrad& f) {
  const double j = f.determinant();
  if (j <= 0.0) throw std::domain_error("deformation gradient has det <= 0");
  const Eigen::Matrix3d c = f.transpose() * f;
  const double tr_c = c.trace();
  const double tr_c2 = (c * c).trace();
  return {tr_c, 0.5 * (tr_c * tr_c - tr_c2), j};
}

std::array<double, 3> reconstruct_diagonal_c(const InvariantTriplet& t) {
  const double i1 = t.i1;
  const double i2 = t.i2;
  const double i3 = t.j * t.j;

  const double h = (i1 * i1 - 3.0 * i2) / 9.0;
  constexpr double kDegenerate = 1e-12;
  constexpr double kClampTol = 1e-10;

  std::array<double, 3> lam2;
  if (h < -kDegenerate) throw std::domain_error("invariant triplet has complex spectrum");
  if (h < kDegenerate) {
    // repeated-root branch: all three squared stretches coincide
    lam2 = {i1 / 3.0, i1 / 3.0, i1 / 3.0};
  } else {
    const double g = i1 * i2 / 3.0 - i3 - 2.0 * i1 * i1 * i1 / 27.0;
    const double denom = 2.0 * std::pow(h, 1.5);
    double arg = -g / denom;
    // Rounding in g and h is amplified by 1/h^1.5 near repeated roots, so the
    // clamp band has to scale with that amplification.  Snapping |arg| to 1
    // inside the band recovers exact double roots instead of smearing them.
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    const double noise =
        64.0 * kEps * (std::fabs(i1 * i2) / 3.0 + i3 + 2.0 * std::pow(std::fabs(i1), 3) / 27.0) / denom
        + std::fabs(arg) * 48.0 * kEps * i1 * i1 / (9.0 * h);
    if (std::fabs(arg) > 1.0 + noise + kClampTol)
      throw std::domain_error("invariant triplet has complex spectrum");
    if (std::fabs(arg) > 1.0 - noise) arg = arg > 0.0 ? 1.0 : -1.0;
    else arg = std::clamp(arg, -1.0, 1.0);
    const double beta = std::acos(arg);
    const double sh = std::sqrt(h);
    const double pi = std::acos(-1.0);
    lam2 = {
        i1 / 3.0 - 2.0 * sh * std::cos((pi - beta) / 3.0),
        i1 / 3.0 - 2.0 * sh * std::cos((pi + beta) / 3.0),
        i1 / 3.0 + 2.0 * sh * std::cos(beta / 3.0),
    };
  }
  std::sort(lam2.begin(), lam2.end());
  if (lam2[0] <= 0.0) throw std::domain_error("invariant triplet has nonpositive squared stretch");
  return lam2;
}

DefGrad plane_strain_defgrad(double f11, double f12, double f21, double f22) {
  DefGrad f = DefGrad::Identity();
  f(0, 0) = f11;
  f(0, 1) = f12;
  f(1, 0) = f21;
  f(1, 1) = f22;
  return f;
}

std::vector<DefGrad> canonical_path(LoadingMode mode, double amplitude, int steps) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  std::vector<DefGrad> path;
  path.reserve(steps);
  for (int s = 1; s <= steps; ++s) {
    const double frac = static_cast<double>(s) / steps;
    DefGrad f = DefGrad::Identity();
    switch (mode) {
      case LoadingMode::kConstrainedUniaxial: {
        const double lam = 1.0 + frac * (amplitude - 1.0);
        if (lam <= 0.0) throw std::domain_error("non-positive stretch");
        f(0, 0) = lam;
        break;
      }
      case LoadingMode::kConstrainedEquibiaxial: {
        const double lam = 1.0 + frac * (amplitude - 1.0);
        if (lam <= 0.0) throw std::domain_error("non-positive stretch");
        f(0, 0) = lam;
        f(1, 1) = lam;
        break;
      }
      case LoadingMode::kSimpleShear:
        f(0, 1) = frac * amplitude;
        break;
    }
    path.push_back(f);
  }
  return path;
}

}  // namespace hyperfit
