#include "hyperfit/matpoint.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace hyperfit {

namespace {

// S22 and dS22/d(lambda_lateral) for C = diag(l^2, l2^2, l2^2)
void s22_and_slope(const PotentialModel& m, double l, double l2, double& s22,
                   double& slope) {
  const double l_sq = l * l, l2_sq = l2 * l2;
  const InvariantTriplet t{l_sq + 2.0 * l2_sq, l2_sq * l2_sq + 2.0 * l_sq * l2_sq,
                           l * l2_sq};
  const Dual2d phi = m.eval(t);
  const double p1 = phi.g[0], p2 = phi.g[1], pj = phi.g[2];
  s22 = 2.0 * p1 + 2.0 * (l_sq + l2_sq) * p2 + l * pj;

  const double di1 = 4.0 * l2;
  const double di2 = 4.0 * l2 * l2_sq + 4.0 * l_sq * l2;
  const double dj = 2.0 * l * l2;
  const double p11 = phi.h[hess_index(0, 0)], p12 = phi.h[hess_index(0, 1)],
               p1j = phi.h[hess_index(0, 2)], p22 = phi.h[hess_index(1, 1)],
               p2j = phi.h[hess_index(1, 2)], pjj = phi.h[hess_index(2, 2)];
  slope = 2.0 * (p11 * di1 + p12 * di2 + p1j * dj) + 4.0 * l2 * p2
        + 2.0 * (l_sq + l2_sq) * (p12 * di1 + p22 * di2 + p2j * dj)
        + l * (p1j * di1 + p2j * di2 + pjj * dj);
}

}  // namespace

double uniaxial_s22(const PotentialModel& m, double lambda_axial,
                    double lambda_lateral) {
  double s22, slope;
  s22_and_slope(m, lambda_axial, lambda_lateral, s22, slope);
  return s22;
}

UniaxialResult uniaxial_newton(const PotentialModel& m, double lambda_axial,
                               double guess) {
  if (lambda_axial <= 0.0) throw std::invalid_argument("axial stretch must be > 0");
  double l2 = guess > 0.0 ? guess : std::pow(lambda_axial, -0.25);
  UniaxialResult res{l2, 0.0, 0, false};

  double s22, slope;
  s22_and_slope(m, lambda_axial, l2, s22, slope);
  for (int it = 0; it < 50; ++it) {
    if (std::fabs(s22) < 1e-10) {
      res.converged = true;
      break;
    }
    if (slope == 0.0) break;
    double step = -s22 / slope;
    double l2_next = l2 + step;
    double s22_next = 0.0, slope_next = 0.0;
    bool ok = false;
    for (int damp = 0; damp <= 20; ++damp) {
      if (l2_next > 0.0) {
        s22_and_slope(m, lambda_axial, l2_next, s22_next, slope_next);
        if (std::fabs(s22_next) < std::fabs(s22)) {
          ok = true;
          break;
        }
      }
      step *= 0.5;
      l2_next = l2 + step;
    }
    if (!ok) break;
    l2 = l2_next;
    s22 = s22_next;
    slope = slope_next;
    res.iterations = it + 1;
  }
  if (std::fabs(s22) < 1e-10) res.converged = true;

  res.lambda_lateral = l2;
  const double l_sq = lambda_axial * lambda_axial, l2_sq = l2 * l2;
  const InvariantTriplet t{l_sq + 2.0 * l2_sq, l2_sq * l2_sq + 2.0 * l_sq * l2_sq,
                           lambda_axial * l2_sq};
  const Dual2d phi = m.eval(t);
  res.s11 = 2.0 * phi.g[0] + 4.0 * l2_sq * phi.g[1] +
            (l2_sq / lambda_axial) * phi.g[2];
  return res;
}

namespace {

void r2_accumulate(const ModeCurve& pred, const ModeCurve& truth, bool inside_window,
                   double lo, double hi, double& ss_res, double& ss_tot,
                   double mean) {
  for (std::size_t i = 0; i < pred.control.size(); ++i) {
    const bool in = pred.control[i] >= lo && pred.control[i] <= hi;
    if (in != inside_window) continue;
    for (int r = 0; r < 3; ++r)
      for (int c = r; c < 3; ++c) {
        const double d = pred.s[i](r, c) - truth.s[i](r, c);
        ss_res += d * d;
        const double dt = truth.s[i](r, c) - mean;
        ss_tot += dt * dt;
      }
  }
}

double window_mean(const ModeCurve& truth, bool inside_window, double lo, double hi) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < truth.control.size(); ++i) {
    const bool in = truth.control[i] >= lo && truth.control[i] <= hi;
    if (in != inside_window) continue;
    for (int r = 0; r < 3; ++r)
      for (int c = r; c < 3; ++c) {
        sum += truth.s[i](r, c);
        ++n;
      }
  }
  return n > 0 ? sum / n : 0.0;
}

double window_r2(const ModeCurve& pred, const ModeCurve& truth, bool inside,
                 double lo, double hi) {
  double ss_res = 0.0, ss_tot = 0.0;
  const double mean = window_mean(truth, inside, lo, hi);
  r2_accumulate(pred, truth, inside, lo, hi, ss_res, ss_tot, mean);
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

}  // namespace

ValidationReport run_validation(const PotentialModel& model,
                                const PotentialModel& truth,
                                const ModeRanges& ranges) {
  ValidationReport rep;
  rep.prediction = canonical_test_data(model, ranges);
  rep.truth = canonical_test_data(truth, ranges);
  for (std::size_t k = 0; k < rep.prediction.size(); ++k) {
    const auto& p = rep.prediction[k];
    const auto& tr = rep.truth[k];
    const bool shear = p.mode == LoadingMode::kSimpleShear;
    const double lo = shear ? -0.2 : 0.8;
    const double hi = shear ? 0.2 : 1.2;
    rep.scores.push_back({p.mode, window_r2(p, tr, true, lo, hi),
                          window_r2(p, tr, false, lo, hi)});
  }
  return rep;
}

void write_validation_csv(const ValidationReport& rep,
                          const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write validation CSV: " + file.string());
  out << "mode,control,S11_true,S22_true,S33_true,S12_true,"
         "S11_pred,S22_pred,S33_pred,S12_pred\n";
  const char* names[3] = {"uniaxial", "equibiaxial", "shear"};
  for (std::size_t k = 0; k < rep.prediction.size(); ++k) {
    const auto& p = rep.prediction[k];
    const auto& tr = rep.truth[k];
    for (std::size_t i = 0; i < p.control.size(); ++i)
      out << names[k] << ',' << p.control[i] << ',' << tr.s[i](0, 0) << ','
          << tr.s[i](1, 1) << ',' << tr.s[i](2, 2) << ',' << tr.s[i](0, 1) << ','
          << p.s[i](0, 0) << ',' << p.s[i](1, 1) << ',' << p.s[i](2, 2) << ','
          << p.s[i](0, 1) << "\n";
  }
}

}  // namespace hyperfit
