#ifndef HYPERFIT_FEM_HPP
#define HYPERFIT_FEM_HPP

#include <Eigen/Sparse>
#include <cstdint>
#include <filesystem>

#include "hyperfit/mesh.hpp"
#include "hyperfit/potential.hpp"

namespace hyperfit {

// Dirichlet data at full load; scaled by the current load factor.
struct Bc {
  std::vector<int> fixed;
  std::vector<double> value;
};

// Bottom edge clamped, top edge gripped with prescribed vertical pull.
Bc tension_bc(const Mesh2D& mesh, double top_uy);

struct LoadSchedule {
  double total_uy{2.5};
  int increments{25};
  std::vector<int> record{1, 5, 10, 15, 20, 25};
};

// Plane-strain deformation gradient of one linear triangle (F33 = 1).
DefGrad element_defgrad(const Mesh2D& mesh, int e, const Eigen::VectorXd& u);

struct Assembly {
  Eigen::VectorXd residual;
  Eigen::SparseMatrix<double> tangent;
  bool inverted{false};  // some element reached det F <= 0
};

// Internal-force residual and its consistent tangent.  Element loops run in
// parallel; the scatter is serial and ordered, so results do not depend on
// the thread count.
Assembly residual_and_tangent(const Mesh2D& mesh, const PotentialModel& m,
                              const Eigen::VectorXd& u, bool with_tangent = true,
                              bool parallel = true);

// Total stored energy sum_e A_e phi(F_e); the residual is its u-gradient.
double total_energy(const Mesh2D& mesh, const PotentialModel& m,
                    const Eigen::VectorXd& u);

struct NewtonReport {
  bool converged{false};
  int iterations{0};
};

// Newton solve at a fixed load factor starting from the given state.
NewtonReport solve_state(const Mesh2D& mesh, const PotentialModel& m,
                         Eigen::VectorXd& u, const Bc& bc, double factor,
                         int max_iters = 25);

// Advances the load factor with step cutting (up to max_cuts halvings).
bool solve_increment(const Mesh2D& mesh, const PotentialModel& m, Eigen::VectorXd& u,
                     const Bc& bc, double from_factor, double to_factor,
                     int max_cuts = 4);

// Sum of residual entries on the constrained dofs of a node set, in the given
// direction (0 = x, 1 = y); discretely dual to the assembled residual.
double reaction_force(const Mesh2D& mesh, const PotentialModel& m,
                      const Eigen::VectorXd& u, const std::string& set_name,
                      int direction);

struct DicStep {
  double strain;
  Eigen::VectorXd u;  // noisy nodal displacements
  double force;       // clean reaction force
};

struct DicDataset {
  std::vector<DicStep> steps;
  std::uint64_t seed{0};
  double noise{0.0};
};

// Runs the load schedule and records displacement fields (plus spatially
// correlated noise scaled to noise_rel of the per-step displacement maximum)
// and reaction forces at the recorded increments.
DicDataset synth_dic(const Mesh2D& mesh, const PotentialModel& m,
                     const LoadSchedule& schedule, double noise_rel,
                     std::uint64_t seed);

void save_dic(const DicDataset& d, const std::filesystem::path& file);
DicDataset load_dic(const std::filesystem::path& file);

// Legacy-ASCII VTK dump of the mesh with a nodal displacement field.
void write_vtk(const Mesh2D& mesh, const Eigen::VectorXd& u,
               const std::filesystem::path& file);

}  // namespace hyperfit

#endif
