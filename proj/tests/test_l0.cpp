#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "hyperfit/l0_train.hpp"
#include "hyperfit/materials.hpp"
#include "hyperfit/sampling.hpp"

using namespace hyperfit;

TEST_CASE("hard-concrete gate limits and the half-sample point") {
  // log_alpha -> -inf closes the gate, -> +inf saturates it at 1
  CHECK(GateParams::deterministic_gate(-40.0) == 0.0);
  CHECK(GateParams::deterministic_gate(40.0) == 1.0);

  // at u = 1/2 the logit vanishes, so the deterministic gate equals the
  // stochastic one
  for (double la : {-1.0, 0.3, 2.0})
    CHECK(GateParams::gate_from_u(la, 0.5) ==
          doctest::Approx(GateParams::deterministic_gate(la)).epsilon(1e-14));

  // gate hits exactly zero already at finite log_alpha: the stretched
  // sigmoid must reach gamma/(gamma - zeta)
  const double s_zero = -GateParams::kGamma / (GateParams::kZeta - GateParams::kGamma);
  const double la_zero =
      GateParams::kBeta * (std::log(s_zero) - std::log1p(-s_zero));
  CHECK(GateParams::deterministic_gate(la_zero - 0.01) == 0.0);
  CHECK(GateParams::deterministic_gate(la_zero + 0.01) > 0.0);
}

TEST_CASE("expected open-gate count") {
  GateParams g;
  g.log_alpha = {-50.0, -50.0};
  CHECK(l0_complexity(g) < 1e-15);

  // the expected-L0 sigmoid is centered at beta log(-gamma/zeta)
  const double center =
      GateParams::kBeta * std::log(-GateParams::kGamma / GateParams::kZeta);
  g.log_alpha = {center, center};
  CHECK(l0_complexity(g) == doctest::Approx(1.0).epsilon(1e-13));

  // scalar oracle at log_alpha = 0: sigmoid(-beta log(-gamma/zeta))
  g.log_alpha = {0.0};
  const double want = 1.0 / (1.0 + std::exp(-(2.0 / 3.0) * std::log(11.0)));
  CHECK(l0_complexity(g) == doctest::Approx(want).epsilon(1e-13));
  CHECK(want == doctest::Approx(1.0 / (1.0 + std::exp(-1.5988))).epsilon(1e-3));
}

TEST_CASE("input dependency penalty") {
  const std::vector<InvariantTriplet> pts = {{4.0, 5.0, 1.2}, {3.5, 4.0, 0.9}};

  // a model using all three inputs far above the threshold pays nothing
  const auto full = make_analytic_material("gent-gent");
  CHECK(input_dependency_penalty(*full, pts) == 0.0);

  // neo-hookean never reads I2, so exactly one channel is flagged with the
  // full squared threshold
  const auto nh = make_analytic_material("neo-hookean");
  CHECK(input_dependency_penalty(*nh, pts) == doctest::Approx(1e-6).epsilon(1e-12));

  CHECK_THROWS(input_dependency_penalty(*full, {}));
}

TEST_CASE("schedules") {
  const TrainSchedule paper = TrainSchedule::paper_scale();
  CHECK(paper.epochs == 2800);
  CHECK(paper.batch == 10);
  CHECK(paper.lr0 == 0.1);
  CHECK(paper.lr_step == 700);
  CHECK(paper.penalty_activation == 1000);
  CHECK(paper.warmup == 500);
  CHECK(paper.w_l0 == 1.0);
  CHECK(paper.w_input == 1e4);

  const TrainSchedule desk = TrainSchedule::desk_scale();
  CHECK(desk.epochs == 1200);
  CHECK(desk.lr_step == 300);
  CHECK(desk.penalty_activation == 430);
  CHECK(desk.warmup == 214);
}

TEST_CASE("gated network plumbing") {
  const IcnnConfig cfg{2, 4, Variant::kUnconstrained};
  GatedNetwork net{IcnnWeights::init(cfg, 3), {}};
  net.gates.log_alpha.assign(net.w.theta.size(), 2.0);

  const auto z = net.deterministic_gates();
  CHECK(z.size() == net.w.theta.size());
  for (double v : z) CHECK(v == doctest::Approx(GateParams::deterministic_gate(2.0)));

  // rounding: anything below the threshold drops to exactly zero
  net.gates.log_alpha[0] = -10.0;
  const auto r = net.rounded_gates(0.05);
  CHECK(r[0] == 0.0);
  CHECK(r[1] > 0.0);

  const auto eff = net.effective_params(r);
  CHECK(eff[0] == 0.0);
  CHECK(eff[1] == doctest::Approx(net.w.theta[1] * r[1]).epsilon(1e-14));
}

TEST_CASE("stress R2 is 1 for the generating model and poor for a zero model") {
  const auto truth = normalize(make_analytic_material("gent-gent"));
  std::vector<LabeledSample> data;
  for (double a = 0.85; a <= 1.3; a += 0.05)
    for (double b = 0.9; b <= 1.2; b += 0.1) {
      std::array<double, 3> c = {a * a, b * b, 1.0};
      std::sort(c.begin(), c.end());  // labels live on the sorted diagonal
      data.push_back({invariants_of_diagonal_c(c), second_pk_diag(*truth, c)});
    }
  CHECK(stress_r2(*truth, data) == doctest::Approx(1.0).epsilon(1e-10));

  struct Zero final : PotentialModel {
    Dual2d eval(const InvariantTriplet&) const override { return Dual2d{}; }
    std::vector<double> params() const override { return {}; }
    std::string name() const override { return "zero"; }
  } zero;
  CHECK(stress_r2(zero, data) <= 0.0);
}

TEST_CASE("short training run produces finite telemetry and a usable model") {
  const auto truth = normalize(make_analytic_material("gent-gent"));
  std::vector<LabeledSample> data;
  for (double a = 0.8; a <= 1.35; a += 0.025)
    for (double b = 0.9; b <= 1.25; b += 0.05) {
      std::array<double, 3> c = {a * a, b * b, (a + b) / 2.0};
      std::sort(c.begin(), c.end());
      data.push_back({invariants_of_diagonal_c(c), second_pk_diag(*truth, c)});
    }

  TrainSchedule sched;
  sched.epochs = 12;
  sched.batch = 10;
  sched.lr_step = 6;
  sched.penalty_activation = 4;
  sched.warmup = 3;

  const IcnnConfig cfg{2, 6, Variant::kPolyconvex};
  const auto tele = std::filesystem::temp_directory_path() / "l0_short.csv";
  const auto res = pretrain(cfg, data, sched, 7, tele);

  CHECK(!res.diverged);
  CHECK(res.history.size() == 12);
  for (const auto& e : res.history) {
    CHECK(std::isfinite(e.loss));
    CHECK(std::isfinite(e.test_r2));
    CHECK(e.complexity >= 0.0);
    CHECK(e.complexity <= double(res.net.w.theta.size()));
  }
  // penalties are off before activation
  CHECK(res.history[0].l0_term == 0.0);
  CHECK(res.history[0].input_term == 0.0);
  CHECK(res.history[11].l0_term >= 0.0);

  CHECK(std::filesystem::exists(tele));

  // constrained slots stay nonnegative throughout
  for (std::size_t i = 0; i < res.net.w.theta.size(); ++i)
    if (res.net.w.nonneg[i]) CHECK(res.net.w.theta[i] >= 0.0);

  // loss decreased over the short run
  CHECK(res.history.back().stress_mse < res.history.front().stress_mse);

  std::filesystem::remove(tele);
}

TEST_CASE("gated network save/load round trip") {
  const IcnnConfig cfg{2, 5, Variant::kRelaxed};
  GatedNetwork net{IcnnWeights::init(cfg, 21), {}};
  net.gates.log_alpha.assign(net.w.theta.size(), 0.0);
  for (std::size_t i = 0; i < net.gates.log_alpha.size(); ++i)
    net.gates.log_alpha[i] = 0.1 * double(i % 7) - 0.3;

  const auto file = std::filesystem::temp_directory_path() / "gated_roundtrip.json";
  save_gated_network(net, file);
  const GatedNetwork back = load_gated_network(file);
  CHECK(back.w.cfg.layers == cfg.layers);
  CHECK(back.w.cfg.hidden == cfg.hidden);
  CHECK(back.w.cfg.variant == cfg.variant);
  CHECK(back.w.theta == net.w.theta);
  CHECK(back.gates.log_alpha == net.gates.log_alpha);
  std::filesystem::remove(file);
}
