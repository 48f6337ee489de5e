#ifndef HYPERFIT_KINEMATICS_HPP
#define HYPERFIT_KINEMATICS_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace hyperfit {

using DefGrad = Eigen::Matrix3d;

// Point in isotropic invariant space; the reference state is (3, 3, 1).
struct InvariantTriplet {
  double i1{3.0};
  double i2{3.0};
  double j{1.0};
};

InvariantTriplet invariants_of(const DefGrad& f);

// Squared principal stretches of the diagonal right Cauchy-Green tensor with
// the given invariants, sorted ascending.  Throws std::domain_error if the
// triplet has no real nonnegative spectrum.
std::array<double, 3> reconstruct_diagonal_c(const InvariantTriplet& t);

enum class LoadingMode {
  kConstrainedUniaxial,
  kConstrainedEquibiaxial,
  kSimpleShear,
};

// Evenly spaced deformation gradients from the reference state to the given
// amplitude (stretch for the uniaxial/equibiaxial modes, shear for shear).
std::vector<DefGrad> canonical_path(LoadingMode mode, double amplitude, int steps);

DefGrad plane_strain_defgrad(double f11, double f12, double f21, double f22);

}  // namespace hyperfit

#endif
