#ifndef HYPERFIT_MATPOINT_HPP
#define HYPERFIT_MATPOINT_HPP

#include <filesystem>

#include "hyperfit/sampling.hpp"

namespace hyperfit {

struct UniaxialResult {
  double lambda_lateral;
  double s11;
  int iterations;
  bool converged;
};

// Traction-free uniaxial state: Newton on S22(lambda_lateral) = 0 with the
// consistent tangent from second invariant derivatives; damped steps, lateral
// stretch kept positive.  Default guess sits between the rigid and
// incompressible limits.
UniaxialResult uniaxial_newton(const PotentialModel& m, double lambda_axial,
                               double guess = 0.0);

// S22 at a given axial/lateral stretch pair (the Newton residual; exposed so
// independent root-finders can cross-check solutions).
double uniaxial_s22(const PotentialModel& m, double lambda_axial,
                    double lambda_lateral);

struct ModeScore {
  LoadingMode mode;
  double r2_inside;   // control within the training range
  double r2_outside;
};

struct ValidationReport {
  std::vector<ModeScore> scores;
  std::vector<ModeCurve> prediction;
  std::vector<ModeCurve> truth;
};

// Canonical-mode stress curves of a candidate model against ground truth,
// scored by R^2 inside/outside the training window.
ValidationReport run_validation(const PotentialModel& model,
                                const PotentialModel& truth,
                                const ModeRanges& ranges = {});

void write_validation_csv(const ValidationReport& rep,
                          const std::filesystem::path& file);

}  // namespace hyperfit

#endif
