// Timing comparison of the serial and parallel residual/tangent assembly.
#include <chrono>
#include <iostream>

#include "hyperfit/fem.hpp"
#include "hyperfit/materials.hpp"

using namespace hyperfit;

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 60;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 10;

  const Mesh2D mesh = make_plate(3.0, 5.0, n, n);
  const auto model = normalize(std::make_shared<NeoHookean>());
  Eigen::VectorXd u = Eigen::VectorXd::Zero(mesh.num_dofs());
  for (int i = 0; i < mesh.num_nodes(); ++i) u[2 * i + 1] = 0.1 * mesh.nodes[i].y();

  const auto time = [&](bool parallel) {
    const auto t0 = std::chrono::steady_clock::now();
    double checksum = 0.0;
    for (int r = 0; r < reps; ++r) {
      const Assembly a = residual_and_tangent(mesh, *model, u, true, parallel);
      checksum += a.residual.norm();
    }
    const auto t1 = std::chrono::steady_clock::now();
    std::cout << (parallel ? "parallel" : "serial  ") << ": "
              << std::chrono::duration<double, std::milli>(t1 - t0).count() / reps
              << " ms/assembly (checksum " << checksum << ")\n";
    return checksum;
  };

  std::cout << mesh.num_elements() << " elements, " << reps << " repetitions\n";
  const double serial = time(false);
  const double parallel = time(true);
  std::cout << "results identical: " << (serial == parallel ? "yes" : "NO") << "\n";
  return serial == parallel ? 0 : 1;
}
