// End-to-end acceptance gate.  Each numbered criterion prints exactly one
// PASS/FAIL line; the exit code is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "hyperfit/adjoint.hpp"
#include "hyperfit/grf.hpp"
#include "hyperfit/l0_train.hpp"
#include "hyperfit/materials.hpp"
#include "hyperfit/matpoint.hpp"
#include "hyperfit/polyconvexity.hpp"
#include "hyperfit/sampling.hpp"
#include "hyperfit/tape.hpp"

using namespace hyperfit;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int num, const char* what, bool pass, double seconds) {
  std::printf("[%s] %d: %s (%.1fs)\n", pass ? "PASS" : "FAIL", num, what, seconds);
  if (!pass) ++failures;
  std::fflush(stdout);
}

double rel_err(double got, double want) {
  return std::fabs(got - want) / std::max(1.0, std::fabs(want));
}

// ---------------------------------------------------------------------------
// 1. derivative correctness: dual numbers, tape, adjoint calibration gradient

bool derivative_correctness() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> dl(0.6, 1.8);
  const auto mats = {std::string("gent-gent"), std::string("neo-hookean"),
                     std::string("ogden")};

  // forward duals against central differences on the analytic energies
  int cases = 0;
  for (const auto& name : mats) {
    const auto m = make_analytic_material(name);
    for (int trial = 0; trial < 400; ++trial) {
      std::array<double, 3> lam2 = {dl(rng), dl(rng), dl(rng)};
      const InvariantTriplet t = invariants_of_diagonal_c(lam2);
      const Dual2d f = m->eval(t);
      const auto phi = [&](double a, double b, double c) {
        return m->eval({t.i1 + a, t.i2 + b, t.j + c}).v;
      };
      const double h = 1e-5, h2 = 1e-4;
      const double g0 = (phi(h, 0, 0) - phi(-h, 0, 0)) / (2 * h);
      const double g1 = (phi(0, h, 0) - phi(0, -h, 0)) / (2 * h);
      const double g2 = (phi(0, 0, h) - phi(0, 0, -h)) / (2 * h);
      if (rel_err(f.g[0], g0) >= 1e-5) return false;
      if (rel_err(f.g[1], g1) >= 1e-5) return false;
      if (rel_err(f.g[2], g2) >= 1e-5) return false;
      const double f0 = phi(0, 0, 0);
      const double h00 = (phi(h2, 0, 0) - 2 * f0 + phi(-h2, 0, 0)) / (h2 * h2);
      const double h11 = (phi(0, h2, 0) - 2 * f0 + phi(0, -h2, 0)) / (h2 * h2);
      const double h22 = (phi(0, 0, h2) - 2 * f0 + phi(0, 0, -h2)) / (h2 * h2);
      const double h01 = (phi(h2, h2, 0) - phi(h2, -h2, 0) - phi(-h2, h2, 0) +
                          phi(-h2, -h2, 0)) /
                         (4 * h2 * h2);
      if (rel_err(f.h[hess_index(0, 0)], h00) >= 1e-5) return false;
      if (rel_err(f.h[hess_index(1, 1)], h11) >= 1e-5) return false;
      if (rel_err(f.h[hess_index(2, 2)], h22) >= 1e-5) return false;
      if (rel_err(f.h[hess_index(0, 1)], h01) >= 1e-5) return false;
      ++cases;
    }
  }
  if (cases < 1000) return false;

  // tape gradients of the sparse energy with respect to the parameters
  for (Variant v : {Variant::kPolyconvex, Variant::kRelaxed}) {
    const SparseModel base = pretrained_model(v);
    const std::vector<double> theta = base.params();
    for (int trial = 0; trial < 40; ++trial) {
      std::array<double, 3> lam2 = {dl(rng), dl(rng), dl(rng)};
      const InvariantTriplet t = invariants_of_diagonal_c(lam2);
      Tape tape;
      std::vector<Rev> th(theta.size());
      for (std::size_t i = 0; i < theta.size(); ++i) th[i] = tape.leaf(theta[i]);
      const auto phi = normalized_sparse_eval<Rev>(v, std::span<const Rev>(th), t);
      const auto g = tape.gradient(phi.v);
      const double h = 1e-6;
      for (std::size_t k = 0; k < theta.size(); ++k) {
        auto tp = theta, tm = theta;
        tp[k] += h;
        tm[k] -= h;
        const double fd =
            (normalized_sparse_eval<double>(v, std::span<const double>(tp), t).v -
             normalized_sparse_eval<double>(v, std::span<const double>(tm), t).v) /
            (2 * h);
        if (rel_err(g[k], fd) >= 1e-5) return false;
      }
    }
  }

  // adjoint calibration gradient vs finite differences: the mandated
  // 2-element mesh (fully constrained under the tension grips) plus a mesh
  // with interior nodes so the transpose solve is exercised too
  const auto adjoint_fd_check = [&](Mesh2D mesh) {
    LoadSchedule sched;
    sched.total_uy = 0.08;
    sched.increments = 4;
    sched.record = {2, 4};
    SparseModel truth = pretrained_model(Variant::kRelaxed);
    DicDataset dic = synth_dic(mesh, truth, sched, 0.0, 3);
    CalibrationProblem p{std::move(mesh), pretrained_model(Variant::kRelaxed),
                         std::move(dic), sched, CalibrationConfig{}, {}};
    p.theta0 = p.model.params();
    p.cfg.alpha1 = 0.5;
    std::vector<double> theta = p.theta0;
    theta[0] *= 1.04;
    theta[1] *= 0.96;
    const std::vector<double> g = gradient(p, theta);
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
      auto tp = theta, tm = theta;
      tp[k] += h;
      tm[k] -= h;
      const double fd = (objective(p, tp).total - objective(p, tm).total) / (2 * h);
      if (rel_err(g[k], fd) >= 1e-5) return false;
    }
    return true;
  };
  if (!adjoint_fd_check(make_plate(1.0, 1.0, 1, 1))) return false;
  if (!adjoint_fd_check(make_plate(1.0, 2.0, 2, 3))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// 2. invariant reconstruction round trip

bool reconstruction_round_trip() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(0.3, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<double, 3> lam2 = {d(rng), d(rng), d(rng)};
    if (trial % 4 == 0) lam2[1] = lam2[0];
    if (trial % 9 == 0) lam2 = {lam2[2], lam2[2], lam2[2]};
    std::sort(lam2.begin(), lam2.end());
    const InvariantTriplet t = invariants_of_diagonal_c(lam2);
    const auto back = reconstruct_diagonal_c(t);
    const InvariantTriplet t2 = invariants_of_diagonal_c(back);
    if (std::fabs(t2.i1 - t.i1) > 1e-9 * std::max(1.0, t.i1)) return false;
    if (std::fabs(t2.i2 - t.i2) > 1e-9 * std::max(1.0, t.i2)) return false;
    if (std::fabs(t2.j - t.j) > 1e-9 * std::max(1.0, t.j)) return false;
    for (int k = 0; k < 3; ++k)
      if (std::fabs(back[k] - lam2[k]) > 1e-9 * std::max(1.0, lam2[k])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 3. normalization of the shipped parameter sets

bool shipped_normalization() {
  for (Variant v : {Variant::kPolyconvex, Variant::kRelaxed, Variant::kUnconstrained}) {
    const SparseModel m = pretrained_model(v);
    if (std::fabs(m.eval(reference_triplet()).v) >= 1e-8) return false;
    const auto s = second_pk_diag(m, {1.0, 1.0, 1.0});
    const double norm = std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
    if (norm >= 1e-8) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 4. polyconvexity indicator claims on the training set

bool indicator_claims(const std::vector<InvariantTriplet>& training) {
  const auto gg = normalize(make_analytic_material("gent-gent"));
  int violations = 0;
  for (const auto& t : training)
    if (indicator(*gg, t).g2 < 0.0) ++violations;
  if (violations < 1) return false;

  const SparseModel poly = pretrained_model(Variant::kPolyconvex);
  for (const auto& t : training) {
    const auto v = indicator(poly, t);
    if (v.g1 < -1e-9 || v.g2 < -1e-9 || v.gj < -1e-9) return false;
  }

  for (Variant var : {Variant::kRelaxed, Variant::kUnconstrained}) {
    const SparseModel m = pretrained_model(var);
    for (const auto& t : training)
      if (indicator(m, t).g1 < -1e-9) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 5. material-point uniaxial bench

bool matpoint_bench() {
  NeoHookeanParams stiff;
  stiff.mu = 1.0;
  stiff.lambda = 1e4;
  const auto nh = normalize(std::make_shared<NeoHookean>(stiff));
  for (double lam : {1.2, 1.5}) {
    const auto r = uniaxial_newton(*nh, lam);
    if (!r.converged) return false;
    const double want = 1.0 / std::sqrt(lam);
    if (std::fabs(r.lambda_lateral - want) / want >= 0.01) return false;
  }

  const auto gg = normalize(make_analytic_material("gent-gent"));
  const auto r = uniaxial_newton(*gg, 1.5);
  if (!r.converged) return false;
  // bisection oracle on the exposed residual
  double lo = 0.4, hi = 1.6;
  double flo = uniaxial_s22(*gg, 1.5, lo);
  if (flo * uniaxial_s22(*gg, 1.5, hi) >= 0.0) return false;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = uniaxial_s22(*gg, 1.5, mid);
    if (flo * fm <= 0.0) hi = mid;
    else {
      lo = mid;
      flo = fm;
    }
  }
  return std::fabs(r.lambda_lateral - 0.5 * (lo + hi)) < 1e-8;
}

// ---------------------------------------------------------------------------
// 6. finite element correctness

bool fe_correctness() {
  const auto m = normalize(make_analytic_material("neo-hookean"));

  // patch test with affine boundary data
  {
    const double w = 2.0, h = 2.0;
    const Mesh2D mesh = make_plate(w, h, 4, 4);
    Eigen::Matrix2d a;
    a << 1.07, 0.02, -0.03, 0.94;
    Bc bc;
    for (int i = 0; i < mesh.num_nodes(); ++i) {
      const auto& x = mesh.nodes[i];
      if (x.x() > 1e-12 && x.x() < w - 1e-12 && x.y() > 1e-12 && x.y() < h - 1e-12)
        continue;
      const Eigen::Vector2d u = (a - Eigen::Matrix2d::Identity()) * x;
      bc.fixed.push_back(2 * i);
      bc.value.push_back(u.x());
      bc.fixed.push_back(2 * i + 1);
      bc.value.push_back(u.y());
    }
    Eigen::VectorXd u = Eigen::VectorXd::Zero(mesh.num_dofs());
    if (!solve_state(mesh, *m, u, bc, 1.0).converged) return false;
    for (int i = 0; i < mesh.num_nodes(); ++i) {
      const Eigen::Vector2d want = (a - Eigen::Matrix2d::Identity()) * mesh.nodes[i];
      if (std::fabs(u[2 * i] - want.x()) >= 1e-10) return false;
      if (std::fabs(u[2 * i + 1] - want.y()) >= 1e-10) return false;
    }
  }

  // tangent and residual consistency at a random state
  {
    const Mesh2D mesh = make_plate(1.0, 1.0, 2, 2);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> d(-0.04, 0.04);
    Eigen::VectorXd u(mesh.num_dofs());
    for (int i = 0; i < u.size(); ++i) u[i] = d(rng);

    const Assembly a = residual_and_tangent(mesh, *m, u);
    const Eigen::MatrixXd k = Eigen::MatrixXd(a.tangent);
    const double h = 1e-7;
    for (int j = 0; j < u.size(); ++j) {
      Eigen::VectorXd up = u, um = u;
      up[j] += h;
      um[j] -= h;
      const Eigen::VectorXd fd =
          (residual_and_tangent(mesh, *m, up, false).residual -
           residual_and_tangent(mesh, *m, um, false).residual) /
          (2 * h);
      for (int i = 0; i < u.size(); ++i)
        if (std::fabs(k(i, j) - fd[i]) >= 1e-5 * std::max(1.0, std::fabs(fd[i])))
          return false;
      const double efd =
          (total_energy(mesh, *m, up) - total_energy(mesh, *m, um)) / (2 * h);
      if (std::fabs(a.residual[j] - efd) >= 1e-6 * std::max(1.0, std::fabs(efd)))
        return false;
    }

    // zero reaction at the reference state
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(mesh.num_dofs());
    if (std::fabs(reaction_force(mesh, *m, zero, "top", 1)) >= 1e-12) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 7. desk-scale pre-training on all three variants

bool desk_pretraining(const std::vector<LabeledSample>& data) {
  for (Variant v : {Variant::kPolyconvex, Variant::kRelaxed, Variant::kUnconstrained}) {
    const IcnnConfig cfg{2, 32, v};
    const auto res = pretrain(cfg, data, TrainSchedule::desk_scale(), 11);
    std::printf("    %s: test R2 = %.4f, gates closed = %.1f%%%s\n",
                variant_name(v).c_str(), res.test_r2,
                100.0 * res.gate_closed_fraction, res.diverged ? " (diverged)" : "");
    std::fflush(stdout);
    if (res.diverged) return false;
    if (res.test_r2 <= 0.95) return false;
    if (res.gate_closed_fraction < 0.80) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 8. desk-scale transfer learning on the holed plate

bool desk_transfer() {
  Mesh2D mesh = make_plate_with_holes(3.0, 5.0, 8, 14,
                                      {{1.5, 1.25, 0.4}, {1.5, 2.5, 0.4},
                                       {1.5, 3.75, 0.4}});
  const auto nh = normalize(make_analytic_material("neo-hookean"));
  const LoadSchedule sched;
  DicDataset dic = synth_dic(mesh, *nh, sched, 0.0, 1);

  CalibrationProblem p{std::move(mesh), pretrained_model(Variant::kRelaxed),
                       std::move(dic), sched, CalibrationConfig{}, {}};
  p.theta0 = p.model.params();
  p.cfg.max_iters = 50;

  const CalibrationResult res = calibrate(p);
  const ObjectiveParts before = objective(p, p.theta0);
  const ObjectiveParts after = objective(p, res.theta);
  std::printf("    displacement misfit %.3e -> %.3e (%.0fx)\n", before.disp,
              after.disp, before.disp / std::max(after.disp, 1e-300));
  std::fflush(stdout);
  if (after.disp > before.disp / 100.0) return false;

  SparseModel calibrated(Variant::kRelaxed, res.theta);
  double worst = 0.0;
  for (double lam = 1.0; lam <= 1.4 + 1e-9; lam += 0.05) {
    const auto rc = uniaxial_newton(calibrated, lam);
    const auto rt = uniaxial_newton(*nh, lam);
    if (!rc.converged || !rt.converged) return false;
    const double err = std::fabs(rc.s11 - rt.s11) / std::max(std::fabs(rt.s11), 1e-8);
    worst = std::max(worst, lam > 1.0 ? err : 0.0);
  }
  std::printf("    worst uniaxial S11 deviation: %.2f%%\n", 100.0 * worst);
  std::fflush(stdout);
  return worst < 0.05;
}

// ---------------------------------------------------------------------------
// 9. sampling quality: selection spread and random field statistics

bool sampling_quality(const std::vector<CloudPoint>& cloud,
                      const SelectionResult& sel) {
  std::mt19937_64 rng(99);
  double best_random = 0.0;
  std::vector<int> idx(cloud.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<int> sub(idx.begin(), idx.begin() + 100);
    double dmin, dnn;
    subset_spread(cloud, sub, dmin, dnn);
    best_random = std::max(best_random, dmin);
  }
  std::printf("    selection d_min = %.4f, best-of-50-random = %.4f\n", sel.d_min,
              best_random);
  std::fflush(stdout);
  if (sel.d_min < best_random) return false;

  const Mesh2D mesh = make_plate(3.0, 5.0, 12, 20);
  std::vector<Eigen::VectorXd> fields;
  for (int r = 0; r < 50; ++r) fields.push_back(grf_field(mesh, 0.33, 1.0, 1000 + r));
  const double est = estimate_corr_len(mesh, fields);
  std::printf("    estimated correlation length = %.3f (target 0.33)\n", est);
  std::fflush(stdout);
  return est >= 0.33 * 0.7 && est <= 0.33 * 1.3;
}

}  // namespace

int main() {
  const auto timed = [](auto&& fn) {
    const auto t0 = Clock::now();
    const bool ok = fn();
    const double s = std::chrono::duration<double>(Clock::now() - t0).count();
    return std::pair<bool, double>(ok, s);
  };

  {
    auto [ok, s] = timed(derivative_correctness);
    report(1, "dual/tape/adjoint derivatives vs finite differences", ok, s);
  }
  {
    auto [ok, s] = timed(reconstruction_round_trip);
    report(2, "invariant reconstruction round trip to 1e-9", ok, s);
  }
  {
    auto [ok, s] = timed(shipped_normalization);
    report(3, "shipped models normalized at the reference state", ok, s);
  }

  // shared 50000-point cloud and 100-triplet selection (criteria 4, 7, 9)
  const auto t0 = Clock::now();
  const SamplerConfig sampler;
  const SaConfig sa;
  const auto cloud = lhs_defgrads(sampler, 2026);
  const auto sel = select_triplets(cloud, sampler, sa, 2026);
  std::vector<InvariantTriplet> training;
  for (const auto& p : sel.points) training.push_back(p.t);
  std::printf("  [shared] cloud + selection built in %.1fs\n",
              std::chrono::duration<double>(Clock::now() - t0).count());
  std::fflush(stdout);

  {
    auto [ok, s] = timed([&] { return indicator_claims(training); });
    report(4, "indicator claims on the 100-triplet training set", ok, s);
  }
  {
    auto [ok, s] = timed(matpoint_bench);
    report(5, "uniaxial material-point bench", ok, s);
  }
  {
    auto [ok, s] = timed(fe_correctness);
    report(6, "finite element patch/tangent/energy/reaction checks", ok, s);
  }
  {
    const auto gg = normalize(make_analytic_material("gent-gent"));
    const auto data = label_with(*gg, training);
    auto [ok, s] = timed([&] { return desk_pretraining(data); });
    report(7, "desk-scale pre-training (R2 > 0.95, >= 80% gates closed)", ok, s);
  }
  {
    auto [ok, s] = timed(desk_transfer);
    report(8, "desk-scale transfer learning on the holed plate", ok, s);
  }
  {
    auto [ok, s] = timed([&] { return sampling_quality(cloud, sel); });
    report(9, "sampling spread and random-field statistics", ok, s);
  }

  if (failures) std::printf("%d criterion(s) failed\n", failures);
  else std::printf("all acceptance criteria passed\n");
  return failures;
}
