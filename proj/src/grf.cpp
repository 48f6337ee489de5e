#include "hyperfit/grf.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace hyperfit {

namespace {

constexpr double kRobinScale = 1.42;  // boundary-term tuning constant

struct SpdeOperator {
  Eigen::SparseMatrix<double> a;
  Eigen::VectorXd lumped_mass;

  SpdeOperator(const Mesh2D& mesh, double corr_len) {
    const double gamma = corr_len * corr_len;
    const double delta = 1.0;
    const int nn = mesh.num_nodes();
    std::vector<Eigen::Triplet<double>> trips;
    lumped_mass = Eigen::VectorXd::Zero(nn);

    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto& el = mesh.elements[e];
      const Eigen::Vector2d x0 = mesh.nodes[el[0]], x1 = mesh.nodes[el[1]],
                            x2 = mesh.nodes[el[2]];
      const double det = (x1.x() - x0.x()) * (x2.y() - x0.y()) -
                         (x2.x() - x0.x()) * (x1.y() - x0.y());
      const double area = 0.5 * det;
      const double b[3] = {x1.y() - x2.y(), x2.y() - x0.y(), x0.y() - x1.y()};
      const double c[3] = {x2.x() - x1.x(), x0.x() - x2.x(), x1.x() - x0.x()};
      for (int i = 0; i < 3; ++i) {
        lumped_mass[el[i]] += area / 3.0;
        for (int j = 0; j < 3; ++j) {
          const double k = area * (b[i] * b[j] + c[i] * c[j]) / (det * det);
          const double m = area * (i == j ? 1.0 / 6.0 : 1.0 / 12.0);
          trips.emplace_back(el[i], el[j], gamma * k + delta * m);
        }
      }
    }

    // boundary edges (those used by exactly one element) carry the Robin mass
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& el : mesh.elements)
      for (int k = 0; k < 3; ++k) {
        int p = el[k], q = el[(k + 1) % 3];
        if (p > q) std::swap(p, q);
        ++edge_count[{p, q}];
      }
    const double robin = std::sqrt(delta * gamma) / kRobinScale;
    for (const auto& [edge, count] : edge_count) {
      if (count != 1) continue;
      const double len = (mesh.nodes[edge.first] - mesh.nodes[edge.second]).norm();
      trips.emplace_back(edge.first, edge.first, robin * len / 3.0);
      trips.emplace_back(edge.second, edge.second, robin * len / 3.0);
      trips.emplace_back(edge.first, edge.second, robin * len / 6.0);
      trips.emplace_back(edge.second, edge.first, robin * len / 6.0);
    }

    a.resize(nn, nn);
    a.setFromTriplets(trips.begin(), trips.end());
  }
};

}  // namespace

Eigen::VectorXd grf_field(const Mesh2D& mesh, double corr_len, double amplitude,
                          std::uint64_t seed) {
  if (corr_len <= 0.0) throw std::invalid_argument("correlation length must be > 0");
  const int nn = mesh.num_nodes();
  if (amplitude == 0.0) return Eigen::VectorXd::Zero(nn);

  const SpdeOperator op(mesh, corr_len);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd b(nn);
  for (int i = 0; i < nn; ++i) b[i] = std::sqrt(op.lumped_mass[i]) * gauss(rng);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(op.a);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("SPDE operator factorization failed");
  Eigen::VectorXd g = solver.solve(b);

  const double mean = g.mean();
  const double var = (g.array() - mean).square().mean();
  if (var > 0.0) g = (g.array() - mean) / std::sqrt(var) * amplitude;
  return g;
}

Eigen::VectorXd grf_noise(const Mesh2D& mesh, double corr_len, double amplitude,
                          std::uint64_t seed) {
  const Eigen::VectorXd gx = grf_field(mesh, corr_len, amplitude, seed * 2 + 1);
  const Eigen::VectorXd gy = grf_field(mesh, corr_len, amplitude, seed * 2 + 2);
  Eigen::VectorXd out(2 * mesh.num_nodes());
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    out[2 * n] = gx[n];
    out[2 * n + 1] = gy[n];
  }
  return out;
}

double estimate_corr_len(const Mesh2D& mesh,
                         const std::vector<Eigen::VectorXd>& fields) {
  if (fields.empty()) throw std::invalid_argument("need at least one realization");
  const int nn = mesh.num_nodes();

  // deterministic node subsample keeps the pair loop cheap
  std::vector<int> pick;
  const int stride = std::max(1, nn / 150);
  for (int n = 0; n < nn; n += stride) pick.push_back(n);

  const double bin_w = 0.05;
  const int n_bins = 30;
  std::vector<double> num(n_bins, 0.0), den_i(n_bins, 0.0), den_j(n_bins, 0.0);
  std::vector<int> cnt(n_bins, 0);

  for (std::size_t a = 0; a < pick.size(); ++a)
    for (std::size_t b = a + 1; b < pick.size(); ++b) {
      const int i = pick[a], j = pick[b];
      const double d = (mesh.nodes[i] - mesh.nodes[j]).norm();
      const int bin = static_cast<int>(d / bin_w);
      if (bin >= n_bins) continue;
      for (const auto& g : fields) {
        num[bin] += g[i] * g[j];
        den_i[bin] += g[i] * g[i];
        den_j[bin] += g[j] * g[j];
      }
      ++cnt[bin];
    }

  std::vector<double> rho(n_bins, 0.0);
  for (int b = 0; b < n_bins; ++b)
    if (cnt[b] > 0 && den_i[b] > 0.0 && den_j[b] > 0.0)
      rho[b] = num[b] / std::sqrt(den_i[b] * den_j[b]);

  // fit the nu = 1 Matern correlation (d/l) K1(d/l) by grid search
  double best_l = 0.0, best_err = std::numeric_limits<double>::infinity();
  for (double l = 0.05; l <= 1.5; l += 0.005) {
    double err = 0.0;
    for (int b = 0; b < n_bins; ++b) {
      if (cnt[b] == 0) continue;
      const double d = (b + 0.5) * bin_w;
      const double x = d / l;
      const double model = x * std::cyl_bessel_k(1.0, x);
      err += cnt[b] * (model - rho[b]) * (model - rho[b]);
    }
    if (err < best_err) {
      best_err = err;
      best_l = l;
    }
  }
  return best_l;
}

}  // namespace hyperfit
