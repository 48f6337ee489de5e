#include <doctest.h>

#include <cmath>

#include "hyperfit/adjoint.hpp"

using namespace hyperfit;

namespace {

CalibrationProblem small_problem(double noise, std::vector<double> theta_truth = {}) {
  Mesh2D mesh = make_plate(1.0, 2.0, 2, 3);
  LoadSchedule sched;
  sched.total_uy = 0.15;
  sched.increments = 5;
  sched.record = {2, 4, 5};
  SparseModel truth = pretrained_model(Variant::kRelaxed);
  if (!theta_truth.empty()) truth.set_params(theta_truth);
  DicDataset dic = synth_dic(mesh, truth, sched, noise, 17);
  CalibrationProblem p{std::move(mesh), pretrained_model(Variant::kRelaxed),
                       std::move(dic), sched, CalibrationConfig{}, {}};
  p.theta0 = p.model.params();
  p.cfg.alpha1 = 0.5;  // fixed weight keeps the objective deterministic
  return p;
}

}  // namespace

TEST_CASE("objective breakdown sums to the total") {
  auto p = small_problem(0.01);
  auto theta = p.theta0;
  theta[0] *= 1.05;
  const ObjectiveParts parts = objective(p, theta);
  CHECK(parts.total ==
        doctest::Approx(parts.disp + parts.force + parts.reg).epsilon(1e-12));
  CHECK(parts.disp > 0.0);
  CHECK(parts.reg > 0.0);
}

TEST_CASE("objective at the generating parameters with clean data is tiny") {
  const auto p = small_problem(0.0);
  const ObjectiveParts parts = objective(p, p.theta0);
  CHECK(parts.disp < 1e-16);
  CHECK(parts.force < 1e-16);
  CHECK(parts.reg == 0.0);
}

TEST_CASE("force misfit scales linearly with alpha1") {
  auto p = small_problem(0.0);
  auto theta = p.theta0;
  theta[4] *= 1.1;
  const ObjectiveParts a = objective(p, theta);
  p.cfg.alpha1 = 1.0;
  const ObjectiveParts b = objective(p, theta);
  CHECK(b.force == doctest::Approx(2.0 * a.force).epsilon(1e-10));
  CHECK(b.disp == doctest::Approx(a.disp).epsilon(1e-12));
}

TEST_CASE("auto-balanced alpha1 equalizes the misfit split at theta0") {
  // truth differs from theta0 so both misfits are nonzero at the start
  auto truth_theta = pretrained_model(Variant::kRelaxed).params();
  truth_theta[0] *= 1.15;
  auto p = small_problem(0.02, truth_theta);
  p.cfg.alpha1 = -1.0;
  const double a1 = resolve_alpha1(p);
  CHECK(a1 > 0.0);
  p.cfg.alpha1 = a1;
  const ObjectiveParts parts = objective(p, p.theta0);
  CHECK(parts.force == doctest::Approx(0.5 * parts.disp).epsilon(1e-8));
}

TEST_CASE("adjoint gradient matches central finite differences") {
  auto p = small_problem(0.01);
  auto theta = p.theta0;
  theta[0] *= 1.03;
  theta[5] *= 0.97;

  ObjectiveParts parts;
  const std::vector<double> g = gradient(p, theta, &parts);
  CHECK(g.size() == theta.size());
  CHECK(parts.total == doctest::Approx(objective(p, theta).total).epsilon(1e-12));

  const double h = 1e-6;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    auto tp = theta, tm = theta;
    tp[k] += h;
    tm[k] -= h;
    const double fd = (objective(p, tp).total - objective(p, tm).total) / (2 * h);
    CHECK(std::fabs(g[k] - fd) < 1e-5 * std::max(1.0, std::fabs(fd)));
  }
}

TEST_CASE("misfit gradient vanishes at the truth on clean data") {
  const auto p = small_problem(0.0);
  const std::vector<double> g = gradient(p, p.theta0);
  double norm = 0.0;
  for (double v : g) norm += v * v;
  CHECK(std::sqrt(norm) < 1e-8);
}

TEST_CASE("calibration from the truth converges immediately") {
  auto p = small_problem(0.0);
  p.cfg.max_iters = 5;
  const CalibrationResult res = calibrate(p);
  CHECK(res.converged);
  CHECK(res.history.size() <= 2);
  for (std::size_t k = 0; k < p.theta0.size(); ++k)
    CHECK(res.theta[k] == doctest::Approx(p.theta0[k]).epsilon(1e-10));
}

TEST_CASE("calibration recovers a perturbed parameter") {
  // truth differs from the starting model in a single parameter
  auto truth_theta = pretrained_model(Variant::kRelaxed).params();
  truth_theta[0] *= 1.2;
  auto p = small_problem(0.0, truth_theta);
  p.cfg.max_iters = 40;
  p.cfg.alpha2 = 0.0;  // no pull back toward the start
  const CalibrationResult res = calibrate(p);

  const ObjectiveParts before = objective(p, p.theta0);
  const ObjectiveParts after = objective(p, res.theta);
  CHECK(after.disp < before.disp * 1e-4);
  CHECK(res.history.size() >= 2);
  // history rows are monotone decreasing in the total objective
  for (std::size_t i = 1; i < res.history.size(); ++i)
    CHECK(res.history[i].parts.total <= res.history[i - 1].parts.total + 1e-14);
}
