#ifndef HYPERFIT_POTENTIAL_HPP
#define HYPERFIT_POTENTIAL_HPP

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <string>
#include <vector>

#include "hyperfit/dual.hpp"
#include "hyperfit/kinematics.hpp"

namespace hyperfit {

// Scalar strain-energy potential over the invariant triplet, with first and
// second invariant-space derivatives carried by the returned dual.
class PotentialModel {
 public:
  virtual ~PotentialModel() = default;
  virtual Dual2d eval(const InvariantTriplet& t) const = 0;
  virtual std::vector<double> params() const = 0;
  virtual std::string name() const = 0;
};

inline InvariantTriplet reference_triplet() { return {3.0, 3.0, 1.0}; }

inline InvariantTriplet invariants_of_diagonal_c(const std::array<double, 3>& lam2) {
  return {lam2[0] + lam2[1] + lam2[2],
          lam2[0] * lam2[1] + lam2[0] * lam2[2] + lam2[1] * lam2[2],
          std::sqrt(lam2[0] * lam2[1] * lam2[2])};
}

// Diagonal second Piola-Kirchhoff stress for a diagonal C:
//   S_kk = 2 phi_1 + 2 phi_2 (I1 - lam_k^2) + J phi_J / lam_k^2
std::array<double, 3> second_pk_diag(const PotentialModel& m,
                                     const std::array<double, 3>& c_diag);

// Full second Piola-Kirchhoff stress S = 2 phi_1 I + 2 phi_2 (I1 I - C) + J phi_J C^-1.
Eigen::Matrix3d second_pk_full(const PotentialModel& m, const Eigen::Matrix3d& c);

// Energy/stress normalization: phi_hat = phi - phi(ref) - n (J - 1) with
// n = (2 phi_1 + 4 phi_2 + phi_J) at the reference state, so the normalized
// model has zero energy and zero stress at C = I.
class NormalizedModel final : public PotentialModel {
 public:
  explicit NormalizedModel(std::shared_ptr<const PotentialModel> base);

  Dual2d eval(const InvariantTriplet& t) const override;
  std::vector<double> params() const override { return base_->params(); }
  std::string name() const override { return base_->name() + "+normalized"; }

  double phi0() const { return phi0_; }
  double stress_constant() const { return n_; }

 private:
  std::shared_ptr<const PotentialModel> base_;
  double phi0_;
  double n_;
};

std::shared_ptr<const PotentialModel> normalize(std::shared_ptr<const PotentialModel> base);

}  // namespace hyperfit

#endif
