#ifndef HYPERFIT_L0_TRAIN_HPP
#define HYPERFIT_L0_TRAIN_HPP

#include <filesystem>
#include <vector>

#include "hyperfit/icnn.hpp"
#include "hyperfit/tape.hpp"

namespace hyperfit {

// Hard-concrete stochastic gates, one per network parameter.
struct GateParams {
  static constexpr double kGamma = -0.1;
  static constexpr double kZeta = 1.1;
  static constexpr double kBeta = 2.0 / 3.0;

  std::vector<double> log_alpha;

  static double gate_from_u(double log_alpha, double u);
  static double deterministic_gate(double log_alpha);  // u = 1/2
};

// Expected number of open gates: sum of sigmoid(log_alpha - beta log(-gamma/zeta)).
double l0_complexity(const GateParams& g);

// Hinge on the mean absolute energy gradient per input channel; positive when
// the model has (numerically) dropped its dependence on a channel.
double input_dependency_penalty(const PotentialModel& m,
                                const std::vector<InvariantTriplet>& points);

struct LabeledSample {
  InvariantTriplet t;
  std::array<double, 3> s_diag;
};

struct TrainSchedule {
  int epochs{2800};
  int batch{10};
  double lr0{0.1};
  int lr_step{700};              // divide lr by 10 every lr_step epochs
  int penalty_activation{1000};  // penalties off before this epoch
  int warmup{500};               // linear ramp length after activation
  double w_l0{1.0};
  double w_input{1e4};
  double w_indicator{1.0};  // relaxed variant only

  static TrainSchedule paper_scale() { return {}; }
  static TrainSchedule desk_scale();  // everything shrunk proportionally
};

struct GatedNetwork {
  IcnnWeights w;
  GateParams gates;

  std::vector<double> deterministic_gates() const;
  std::vector<double> rounded_gates(double threshold = 0.05) const;
  std::vector<double> effective_params(const std::vector<double>& gates) const;
  DenseModel effective_model() const;  // deterministic gates applied
};

struct EpochStats {
  int epoch;
  double loss, stress_mse, l0_term, input_term, indicator_term;
  double complexity, train_r2, test_r2;
};

struct PretrainResult {
  GatedNetwork net;
  SparseExtraction sparse;
  std::vector<EpochStats> history;
  double test_r2{0.0};
  double gate_closed_fraction{0.0};
  bool diverged{false};
};

// Adam loop on stress-matching loss + L0 + input-dependency (+ indicator
// penalty for the relaxed variant).  Data is split 80/20 train/test by a
// seed-fixed shuffle.  Telemetry CSV written per epoch when a path is given.
PretrainResult pretrain(const IcnnConfig& cfg, const std::vector<LabeledSample>& data,
                        const TrainSchedule& sched, std::uint64_t seed,
                        const std::filesystem::path& telemetry_csv = {});

// Mean of per-component R^2 = 1 - SSres/SStot for the diagonal stress.
double stress_r2(const PotentialModel& m, const std::vector<LabeledSample>& data);

void save_gated_network(const GatedNetwork& net, const std::filesystem::path& file);
GatedNetwork load_gated_network(const std::filesystem::path& file);

}  // namespace hyperfit

#endif
