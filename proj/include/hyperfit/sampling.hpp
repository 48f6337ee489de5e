#ifndef HYPERFIT_SAMPLING_HPP
#define HYPERFIT_SAMPLING_HPP

#include <cstdint>
#include <vector>

#include "hyperfit/l0_train.hpp"
#include "hyperfit/potential.hpp"

namespace hyperfit {

struct SamplerConfig {
  int n_cloud{50000};
  double delta{0.2};
  int k_select{100};
};

struct SaConfig {
  double alpha{1.0};    // weight on d_min
  double beta{0.25};    // weight on mean nearest-neighbor distance
  double t0{1.0};
  double cooling{0.999};
  int i_max{20000};
  int i_stall{5000};
  int m_cand{256};
  int rescue_every{500};
  int hillclimb_every{5000};
};

struct CloudPoint {
  DefGrad f;
  InvariantTriplet t;
};

// Latin-hypercube samples of the deformation gradient: diagonal 1 + U(-d, d),
// off-diagonal U(-d, d), rejecting det F <= 0.05.
std::vector<CloudPoint> lhs_defgrads(const SamplerConfig& cfg, std::uint64_t seed);

struct SelectionResult {
  std::vector<CloudPoint> points;  // k points, anchor included
  double d_min{0.0};
  double d_nn_mean{0.0};
};

// Hybrid farthest-point seeding plus simulated annealing in z-scored
// invariant space; the reference triplet is forced into the selection.
SelectionResult select_triplets(const std::vector<CloudPoint>& cloud,
                                const SamplerConfig& cfg, const SaConfig& sa,
                                std::uint64_t seed);

// d_min and mean nearest-neighbor distance of a triplet set in z-scored
// coordinates of the given cloud (diagnostic; used by baselines too).
void subset_spread(const std::vector<CloudPoint>& cloud, const std::vector<int>& idx,
                   double& d_min, double& d_nn_mean);

std::vector<LabeledSample> label_with(const PotentialModel& m,
                                      const std::vector<InvariantTriplet>& triplets);

struct ModeCurve {
  LoadingMode mode;
  std::vector<double> control;         // stretch or shear parameter
  std::vector<InvariantTriplet> t;
  std::vector<Eigen::Matrix3d> s;      // full second PK stress
};

struct ModeRanges {
  double uniaxial_lo{0.6}, uniaxial_hi{1.4};
  double equibiaxial_lo{0.8}, equibiaxial_hi{1.2};
  double shear_lo{-0.4}, shear_hi{0.4};
  int steps{41};
};

std::vector<ModeCurve> canonical_test_data(const PotentialModel& m,
                                           const ModeRanges& r = {});

}  // namespace hyperfit

#endif
