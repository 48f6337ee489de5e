#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hyperfit/kinematics.hpp"
#include "hyperfit/potential.hpp"

using namespace hyperfit;

TEST_CASE("invariants of simple deformation gradients") {
  const InvariantTriplet ref = invariants_of(DefGrad::Identity());
  CHECK(ref.i1 == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(ref.i2 == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(ref.j == doctest::Approx(1.0).epsilon(1e-14));

  DefGrad f = DefGrad::Identity();
  f(0, 0) = 2.0;  // C = diag(4, 1, 1)
  const InvariantTriplet t = invariants_of(f);
  CHECK(t.i1 == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(t.i2 == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(t.j == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("invariants of simple shear match the eigen-decomposition of C") {
  DefGrad f = DefGrad::Identity();
  f(0, 1) = 0.7;
  const Eigen::Matrix3d c = f.transpose() * f;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(c);
  const auto lam2 = es.eigenvalues();

  const InvariantTriplet t = invariants_of(f);
  CHECK(t.i1 == doctest::Approx(lam2.sum()).epsilon(1e-13));
  CHECK(t.i2 == doctest::Approx(lam2[0] * lam2[1] + lam2[0] * lam2[2] +
                                lam2[1] * lam2[2]).epsilon(1e-13));
  CHECK(t.j == doctest::Approx(1.0).epsilon(1e-13));  // shear is isochoric
}

TEST_CASE("diagonal reconstruction at simple states") {
  const auto ref = reconstruct_diagonal_c({3.0, 3.0, 1.0});
  for (int k = 0; k < 3; ++k) CHECK(ref[k] == doctest::Approx(1.0).epsilon(1e-12));

  const auto uni = reconstruct_diagonal_c({6.0, 9.0, 2.0});
  CHECK(uni[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(uni[1] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(uni[2] == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("diagonal reconstruction round trip") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> d(0.3, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<double, 3> lam2 = {d(rng), d(rng), d(rng)};
    if (trial % 5 == 0) lam2[1] = lam2[0];        // repeated pair
    if (trial % 11 == 0) lam2 = {lam2[0], lam2[0], lam2[0]};  // triple root
    std::sort(lam2.begin(), lam2.end());

    const auto back = reconstruct_diagonal_c(invariants_of_diagonal_c(lam2));
    for (int k = 0; k < 3; ++k)
      CHECK(std::fabs(back[k] - lam2[k]) < 1e-9 * std::max(1.0, lam2[k]));
  }
}

TEST_CASE("reconstruction rejects impossible triplets") {
  CHECK_THROWS_AS(reconstruct_diagonal_c({1.0, 50.0, 1.0}), std::domain_error);
}

TEST_CASE("canonical paths") {
  const auto uni = canonical_path(LoadingMode::kConstrainedUniaxial, 1.4, 5);
  CHECK(uni.size() == 5);
  CHECK(uni.front().isApprox(DefGrad::Identity(), 1e-14) == false);
  CHECK(uni.back()(0, 0) == doctest::Approx(1.4).epsilon(1e-14));
  // constrained: lateral directions stay at 1
  CHECK(uni.back()(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(uni.back()(2, 2) == doctest::Approx(1.0).epsilon(1e-14));

  const auto shear = canonical_path(LoadingMode::kSimpleShear, 0.4, 4);
  for (const auto& f : shear)
    CHECK(f.determinant() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(shear.back()(0, 1) == doctest::Approx(0.4).epsilon(1e-14));

  const auto equi = canonical_path(LoadingMode::kConstrainedEquibiaxial, 1.2, 3);
  CHECK(equi.back()(0, 0) == doctest::Approx(1.2).epsilon(1e-14));
  CHECK(equi.back()(1, 1) == doctest::Approx(1.2).epsilon(1e-14));
  CHECK(equi.back()(2, 2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("plane strain embedding") {
  const DefGrad f = plane_strain_defgrad(1.1, 0.2, -0.1, 0.9);
  CHECK(f(0, 0) == 1.1);
  CHECK(f(0, 1) == 0.2);
  CHECK(f(1, 0) == -0.1);
  CHECK(f(1, 1) == 0.9);
  CHECK(f(2, 2) == 1.0);
  CHECK(f(0, 2) == 0.0);
  CHECK(f(2, 0) == 0.0);
}
