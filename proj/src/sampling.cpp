#include "hyperfit/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace hyperfit {

namespace {

constexpr double kDetFloor = 0.05;

// One stratified block of n samples over the 9 components.
std::vector<DefGrad> lhs_block(int n, double delta, std::mt19937_64& rng) {
  std::array<std::vector<int>, 9> strata;
  for (auto& s : strata) {
    s.resize(n);
    std::iota(s.begin(), s.end(), 0);
    std::shuffle(s.begin(), s.end(), rng);
  }
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<DefGrad> out(n);
  for (int i = 0; i < n; ++i) {
    DefGrad f;
    for (int c = 0; c < 9; ++c) {
      const double frac = (strata[c][i] + u01(rng)) / n;
      const int row = c / 3, col = c % 3;
      const double center = row == col ? 1.0 : 0.0;
      f(row, col) = center - delta + 2.0 * delta * frac;
    }
    out[i] = f;
  }
  return out;
}

}  // namespace

std::vector<CloudPoint> lhs_defgrads(const SamplerConfig& cfg, std::uint64_t seed) {
  if (cfg.n_cloud < 1) throw std::invalid_argument("need at least one sample");
  std::mt19937_64 rng(seed);
  std::vector<CloudPoint> out;
  out.reserve(cfg.n_cloud);
  while (static_cast<int>(out.size()) < cfg.n_cloud) {
    const int want = cfg.n_cloud - static_cast<int>(out.size());
    for (const DefGrad& f : lhs_block(want, cfg.delta, rng)) {
      if (f.determinant() <= kDetFloor) continue;
      out.push_back({f, invariants_of(f)});
    }
  }
  return out;
}

namespace {

using Vec3 = Eigen::Vector3d;

struct ZSpace {
  Vec3 mean, inv_std;

  explicit ZSpace(const std::vector<CloudPoint>& cloud) {
    mean.setZero();
    for (const auto& p : cloud) mean += Vec3(p.t.i1, p.t.i2, p.t.j);
    mean /= double(cloud.size());
    Vec3 var = Vec3::Zero();
    for (const auto& p : cloud) {
      const Vec3 d = Vec3(p.t.i1, p.t.i2, p.t.j) - mean;
      var += d.cwiseProduct(d);
    }
    var /= double(cloud.size());
    for (int k = 0; k < 3; ++k) inv_std[k] = var[k] > 0.0 ? 1.0 / std::sqrt(var[k]) : 1.0;
  }

  Vec3 map(const InvariantTriplet& t) const {
    return (Vec3(t.i1, t.i2, t.j) - mean).cwiseProduct(inv_std);
  }
};

double dist(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// d_min and mean nearest-neighbor distance of the selected subset.
void pair_stats(const std::vector<Vec3>& z, const std::vector<int>& sel,
                double& d_min, double& d_nn_mean) {
  const int k = static_cast<int>(sel.size());
  d_min = std::numeric_limits<double>::infinity();
  d_nn_mean = 0.0;
  if (k < 2) {
    d_min = 0.0;
    return;
  }
  std::vector<double> nn(k, std::numeric_limits<double>::infinity());
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      const double d = dist(z[sel[a]], z[sel[b]]);
      nn[a] = std::min(nn[a], d);
      nn[b] = std::min(nn[b], d);
      d_min = std::min(d_min, d);
    }
  for (double d : nn) d_nn_mean += d;
  d_nn_mean /= k;
}

struct Sa {
  const std::vector<Vec3>& z;
  const SaConfig& cfg;
  int anchor;
  std::mt19937_64& rng;

  std::vector<int> sel;
  std::vector<char> in_sel;
  std::vector<double> nd;   // distance to nearest selected
  std::vector<int> ni;      // index of that nearest selected
  std::vector<double> prefix;  // cumulative nd^2 for weighted candidate draws
  double obj{0.0};

  Sa(const std::vector<Vec3>& z_, const SaConfig& cfg_, int anchor_,
     std::mt19937_64& rng_)
      : z(z_), cfg(cfg_), anchor(anchor_), rng(rng_) {}

  double objective(const std::vector<int>& s) const {
    double dmin, dnn;
    pair_stats(z, s, dmin, dnn);
    return cfg.alpha * dmin + cfg.beta * dnn;
  }

  void set_selection(std::vector<int> s) {
    sel = std::move(s);
    in_sel.assign(z.size(), 0);
    for (int i : sel) in_sel[i] = 1;
    rebuild_nearest();
    obj = objective(sel);
  }

  void rebuild_nearest() {
    nd.assign(z.size(), std::numeric_limits<double>::infinity());
    ni.assign(z.size(), -1);
    for (std::size_t i = 0; i < z.size(); ++i)
      for (int s : sel) {
        const double d = dist(z[i], z[s]);
        if (d < nd[i]) {
          nd[i] = d;
          ni[i] = s;
        }
      }
    rebuild_prefix();
  }

  void rebuild_prefix() {
    prefix.resize(z.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (!in_sel[i]) acc += nd[i] * nd[i];
      prefix[i] = acc;
    }
  }

  int draw_candidate() {
    const double total = prefix.back();
    if (total <= 0.0) return -1;
    std::uniform_real_distribution<double> u(0.0, total);
    const double r = u(rng);
    const auto it = std::upper_bound(prefix.begin(), prefix.end(), r);
    return static_cast<int>(it - prefix.begin());
  }

  void apply_swap(int out_idx, int in_idx) {
    *std::find(sel.begin(), sel.end(), out_idx) = in_idx;
    in_sel[out_idx] = 0;
    in_sel[in_idx] = 1;
    // adding in_idx can only shrink distances
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double d = dist(z[i], z[in_idx]);
      if (d < nd[i]) {
        nd[i] = d;
        ni[i] = in_idx;
      }
    }
    // points whose nearest was removed need a rescan over the selection
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (ni[i] != out_idx) continue;
      nd[i] = std::numeric_limits<double>::infinity();
      for (int s : sel) {
        const double d = dist(z[i], z[s]);
        if (d < nd[i]) {
          nd[i] = d;
          ni[i] = s;
        }
      }
    }
    rebuild_prefix();
  }

  // closest selected pair (indices into sel)
  std::pair<int, int> closest_pair() const {
    double best = std::numeric_limits<double>::infinity();
    std::pair<int, int> p{0, 1};
    for (std::size_t a = 0; a < sel.size(); ++a)
      for (std::size_t b = a + 1; b < sel.size(); ++b) {
        const double d = dist(z[sel[a]], z[sel[b]]);
        if (d < best) {
          best = d;
          p = {int(a), int(b)};
        }
      }
    return p;
  }

  // greedy 1-swap on a closest-pair endpoint, maximizing d_min
  bool improve_dmin_once() {
    const auto [a, b] = closest_pair();
    double dmin0, dnn0;
    pair_stats(z, sel, dmin0, dnn0);
    double best_dmin = dmin0;
    int best_slot = -1, best_cand = -1;
    for (int slot : {a, b}) {
      if (sel[slot] == anchor) continue;
      for (int trial = 0; trial < cfg.m_cand; ++trial) {
        const int c = draw_candidate();
        if (c < 0 || in_sel[c]) continue;
        std::vector<int> s2 = sel;
        s2[slot] = c;
        double dmin2, dnn2;
        pair_stats(z, s2, dmin2, dnn2);
        if (dmin2 > best_dmin) {
          best_dmin = dmin2;
          best_slot = slot;
          best_cand = c;
        }
      }
    }
    if (best_slot < 0) return false;
    const int out_idx = sel[best_slot];
    apply_swap(out_idx, best_cand);
    obj = objective(sel);
    return true;
  }
};

std::vector<int> fps_seed(const std::vector<Vec3>& z, int k, int anchor, int extra_start) {
  std::vector<int> sel{anchor};
  std::vector<double> nd(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) nd[i] = dist(z[i], z[anchor]);
  if (extra_start >= 0 && extra_start != anchor) {
    sel.push_back(extra_start);
    for (std::size_t i = 0; i < z.size(); ++i)
      nd[i] = std::min(nd[i], dist(z[i], z[extra_start]));
  }
  while (static_cast<int>(sel.size()) < k) {
    int far = -1;
    double best = -1.0;
    for (std::size_t i = 0; i < z.size(); ++i)
      if (nd[i] > best) {
        best = nd[i];
        far = static_cast<int>(i);
      }
    sel.push_back(far);
    for (std::size_t i = 0; i < z.size(); ++i)
      nd[i] = std::min(nd[i], dist(z[i], z[far]));
  }
  return sel;
}

}  // namespace

void subset_spread(const std::vector<CloudPoint>& cloud, const std::vector<int>& idx,
                   double& d_min, double& d_nn_mean) {
  const ZSpace zs(cloud);
  std::vector<Vec3> z(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) z[i] = zs.map(cloud[i].t);
  pair_stats(z, idx, d_min, d_nn_mean);
}

SelectionResult select_triplets(const std::vector<CloudPoint>& cloud,
                                const SamplerConfig& cfg, const SaConfig& sa_cfg,
                                std::uint64_t seed) {
  if (cloud.empty()) throw std::invalid_argument("empty cloud");
  std::vector<CloudPoint> pts = cloud;
  int anchor = -1;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& t = pts[i].t;
    if (t.i1 == 3.0 && t.i2 == 3.0 && t.j == 1.0) {
      anchor = static_cast<int>(i);
      break;
    }
  }
  if (anchor < 0) {
    pts.push_back({DefGrad::Identity(), reference_triplet()});
    anchor = static_cast<int>(pts.size()) - 1;
  }
  const int n = static_cast<int>(pts.size());
  const int k = cfg.k_select;
  if (k < 1 || k > n) throw std::invalid_argument("selection size out of range");

  const ZSpace zs(pts);
  std::vector<Vec3> z(n);
  for (int i = 0; i < n; ++i) z[i] = zs.map(pts[i].t);

  std::mt19937_64 rng(seed);
  Sa sa(z, sa_cfg, anchor, rng);

  if (k == n) {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    sa.set_selection(all);
  } else if (k == 1) {
    sa.set_selection({anchor});
  } else {
    // best-of-several farthest-point seeds
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<int> best_seed;
    double best_obj = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < 5; ++r) {
      auto s = fps_seed(z, k, anchor, r == 0 ? -1 : pick(rng));
      const double o = sa.objective(s);
      if (o > best_obj) {
        best_obj = o;
        best_seed = std::move(s);
      }
    }
    sa.set_selection(best_seed);

    std::vector<int> best_sel = sa.sel;
    double best = sa.obj;
    int since_best = 0;
    double temp = sa_cfg.t0;
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    for (int iter = 1; iter <= sa_cfg.i_max && since_best < sa_cfg.i_stall; ++iter) {
      temp *= sa_cfg.cooling;

      if (sa_cfg.rescue_every > 0 && iter % sa_cfg.rescue_every == 0) {
        sa.improve_dmin_once();
      } else if (sa_cfg.hillclimb_every > 0 && iter % sa_cfg.hillclimb_every == 0) {
        for (int pass = 0; pass < 50 && sa.improve_dmin_once(); ++pass) {}
      } else {
        int slot;
        do {
          slot = std::uniform_int_distribution<int>(0, k - 1)(rng);
        } while (sa.sel[slot] == anchor);
        const int cand = sa.draw_candidate();
        if (cand >= 0 && !sa.in_sel[cand]) {
          std::vector<int> s2 = sa.sel;
          s2[slot] = cand;
          const double o2 = sa.objective(s2);
          const double delta = o2 - sa.obj;
          if (delta > 0.0 || u01(rng) < std::exp(delta / std::max(temp, 1e-12))) {
            const int out_idx = sa.sel[slot];
            sa.apply_swap(out_idx, cand);
            sa.obj = o2;
          }
        }
      }

      if (sa.obj > best) {
        best = sa.obj;
        best_sel = sa.sel;
        since_best = 0;
      } else {
        ++since_best;
      }
    }
    sa.set_selection(best_sel);
    for (int pass = 0; pass < 50 && sa.improve_dmin_once(); ++pass) {}
    if (sa.obj < best) sa.set_selection(best_sel);
  }

  SelectionResult res;
  for (int i : sa.sel) res.points.push_back(pts[i]);
  pair_stats(z, sa.sel, res.d_min, res.d_nn_mean);
  return res;
}

std::vector<LabeledSample> label_with(const PotentialModel& m,
                                      const std::vector<InvariantTriplet>& triplets) {
  std::vector<LabeledSample> out;
  out.reserve(triplets.size());
  for (const auto& t : triplets) {
    const auto c = reconstruct_diagonal_c(t);
    out.push_back({t, second_pk_diag(m, c)});
  }
  return out;
}

std::vector<ModeCurve> canonical_test_data(const PotentialModel& m, const ModeRanges& r) {
  std::vector<ModeCurve> curves;
  struct Spec {
    LoadingMode mode;
    double lo, hi;
  };
  const Spec specs[3] = {
      {LoadingMode::kConstrainedUniaxial, r.uniaxial_lo, r.uniaxial_hi},
      {LoadingMode::kConstrainedEquibiaxial, r.equibiaxial_lo, r.equibiaxial_hi},
      {LoadingMode::kSimpleShear, r.shear_lo, r.shear_hi},
  };
  for (const auto& sp : specs) {
    ModeCurve c;
    c.mode = sp.mode;
    for (int i = 0; i < r.steps; ++i) {
      const double x = sp.lo + (sp.hi - sp.lo) * i / (r.steps - 1);
      DefGrad f = DefGrad::Identity();
      switch (sp.mode) {
        case LoadingMode::kConstrainedUniaxial: f(0, 0) = x; break;
        case LoadingMode::kConstrainedEquibiaxial: f(0, 0) = f(1, 1) = x; break;
        case LoadingMode::kSimpleShear: f(0, 1) = x; break;
      }
      c.control.push_back(x);
      c.t.push_back(invariants_of(f));
      c.s.push_back(second_pk_full(m, f.transpose() * f));
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

}  // namespace hyperfit
