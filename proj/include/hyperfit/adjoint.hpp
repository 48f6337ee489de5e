#ifndef HYPERFIT_ADJOINT_HPP
#define HYPERFIT_ADJOINT_HPP

#include "hyperfit/fem.hpp"
#include "hyperfit/sparse_model.hpp"

namespace hyperfit {

struct CalibrationConfig {
  double alpha1{-1.0};  // force-misfit weight; < 0 requests auto-balancing
  double alpha2{1e-4};  // L2-to-start regularizer weight
  int max_iters{50};
  double grad_tol{1e-8};
  int lbfgs_memory{10};
};

// One transfer-learning unit of work: calibrate the sparse model parameters
// against a recorded synthetic DIC dataset on the given mesh.
struct CalibrationProblem {
  Mesh2D mesh;
  SparseModel model;
  DicDataset dic;
  LoadSchedule schedule;
  CalibrationConfig cfg;
  std::vector<double> theta0;  // pre-trained start, also regularizer center
};

struct ObjectiveParts {
  double total{0.0}, disp{0.0}, force{0.0}, reg{0.0};
};

// alpha1 that balances displacement and force misfits at theta0.
double resolve_alpha1(const CalibrationProblem& p);

ObjectiveParts objective(const CalibrationProblem& p, const std::vector<double>& theta);

// Discrete adjoint gradient: one transpose tangent solve per recorded step,
// parameter sensitivities of the residual via nested duals through the stress.
std::vector<double> gradient(const CalibrationProblem& p,
                             const std::vector<double>& theta,
                             ObjectiveParts* parts = nullptr);

struct HistoryRow {
  int iter;
  ObjectiveParts parts;
  double grad_norm;
  double step;
};

struct CalibrationResult {
  std::vector<double> theta;
  std::vector<HistoryRow> history;
  bool converged{false};
};

// L-BFGS with Armijo backtracking; nonnegativity projection on the masked
// parameters of the polyconvex variant.
CalibrationResult calibrate(const CalibrationProblem& p,
                            const std::filesystem::path& history_csv = {});

}  // namespace hyperfit

#endif
