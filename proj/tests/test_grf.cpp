#include <doctest.h>

#include <cmath>

#include "hyperfit/grf.hpp"

using namespace hyperfit;

TEST_CASE("zero amplitude yields the zero field") {
  const Mesh2D mesh = make_plate(3.0, 5.0, 6, 10);
  const Eigen::VectorXd f = grf_field(mesh, 0.33, 0.0, 7);
  CHECK(f.size() == mesh.num_nodes());
  CHECK(f.norm() == 0.0);

  const Eigen::VectorXd n = grf_noise(mesh, 0.33, 0.0, 7);
  CHECK(n.size() == mesh.num_dofs());
  CHECK(n.norm() == 0.0);
}

TEST_CASE("fields have the requested variance and zero mean") {
  const Mesh2D mesh = make_plate(3.0, 5.0, 12, 20);
  const double amp = 0.7;
  const Eigen::VectorXd f = grf_field(mesh, 0.33, amp, 3);
  const double mean = f.mean();
  CHECK(std::fabs(mean) < 1e-12);
  const double var = f.squaredNorm() / f.size();
  CHECK(var == doctest::Approx(amp * amp).epsilon(1e-10));
}

TEST_CASE("fields are reproducible per seed and independent across seeds") {
  const Mesh2D mesh = make_plate(3.0, 5.0, 10, 16);
  const Eigen::VectorXd a = grf_field(mesh, 0.33, 1.0, 4);
  const Eigen::VectorXd b = grf_field(mesh, 0.33, 1.0, 4);
  CHECK((a - b).norm() == 0.0);

  const Eigen::VectorXd c = grf_field(mesh, 0.33, 1.0, 5);
  const double corr = a.dot(c) / (a.norm() * c.norm());
  CHECK(std::fabs(corr) < 0.2);
}

TEST_CASE("noise components interleave two independent fields") {
  const Mesh2D mesh = make_plate(3.0, 5.0, 8, 12);
  const Eigen::VectorXd n = grf_noise(mesh, 0.33, 1.0, 9);
  Eigen::VectorXd nx(mesh.num_nodes()), ny(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    nx[i] = n[2 * i];
    ny[i] = n[2 * i + 1];
  }
  CHECK(nx.norm() > 0.0);
  CHECK(ny.norm() > 0.0);
  const double corr = nx.dot(ny) / (nx.norm() * ny.norm());
  CHECK(std::fabs(corr) < 0.25);
}

TEST_CASE("nearby nodes are strongly correlated, distant nodes are not") {
  const Mesh2D mesh = make_plate(3.0, 5.0, 12, 20);
  // ensemble statistics over independent realizations at fixed node pairs
  const int reps = 200;
  // pick a node pair closer than the correlation length and one much farther
  int a = -1, near = -1, far = -1;
  for (int i = 0; i < mesh.num_nodes() && far < 0; ++i)
    for (int j = 0; j < mesh.num_nodes(); ++j) {
      const double d = (mesh.nodes[i] - mesh.nodes[j]).norm();
      if (i != j && d < 0.26) {
        a = i;
        near = j;
      }
      if (a == i && d > 2.0) far = j;
    }
  REQUIRE(a >= 0);
  REQUIRE(near >= 0);
  REQUIRE(far >= 0);

  double c_near = 0.0, c_far = 0.0;
  for (int r = 0; r < reps; ++r) {
    const Eigen::VectorXd f = grf_field(mesh, 0.33, 1.0, 100 + r);
    c_near += f[a] * f[near];
    c_far += f[a] * f[far];
  }
  c_near /= reps;
  c_far /= reps;
  CHECK(c_near > 0.4);
  CHECK(std::fabs(c_far) < 0.25);
}

TEST_CASE("correlation length estimate recovers the target") {
  const Mesh2D mesh = make_plate(3.0, 5.0, 12, 20);
  std::vector<Eigen::VectorXd> fields;
  for (int r = 0; r < 25; ++r) fields.push_back(grf_field(mesh, 0.33, 1.0, 500 + r));
  const double est = estimate_corr_len(mesh, fields);
  CHECK(est > 0.33 * 0.6);
  CHECK(est < 0.33 * 1.6);
}
