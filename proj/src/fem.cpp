#include "hyperfit/fem.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "hyperfit/grf.hpp"

namespace hyperfit {

namespace {

struct ElementGeometry {
  double area;
  double grad[3][2];  // dN_a/dX_J

  ElementGeometry(const Mesh2D& mesh, int e) {
    const auto& el = mesh.elements[e];
    const Eigen::Vector2d x0 = mesh.nodes[el[0]], x1 = mesh.nodes[el[1]],
                          x2 = mesh.nodes[el[2]];
    const double det = (x1.x() - x0.x()) * (x2.y() - x0.y()) -
                       (x2.x() - x0.x()) * (x1.y() - x0.y());
    area = 0.5 * det;
    if (area <= 0.0) throw std::runtime_error("element with nonpositive area");
    const double b[3] = {x1.y() - x2.y(), x2.y() - x0.y(), x0.y() - x1.y()};
    const double c[3] = {x2.x() - x1.x(), x0.x() - x2.x(), x1.x() - x0.x()};
    for (int a = 0; a < 3; ++a) {
      grad[a][0] = b[a] / det;
      grad[a][1] = c[a] / det;
    }
  }
};

// Material tangent D_KJPQ = dS_KJ/dC_PQ assembled from the invariant
// first/second derivatives of the potential.
struct MaterialState {
  Eigen::Matrix3d s;            // second PK
  double d[3][3][3][3];         // dS/dC, symmetric in (P,Q)
  bool ok{true};

  MaterialState(const PotentialModel& m, const DefGrad& f, bool with_tangent) {
    const double det = f.determinant();
    if (det <= 0.0) {
      ok = false;
      return;
    }
    const Eigen::Matrix3d c = f.transpose() * f;
    const double i1 = c.trace();
    const double i2 = 0.5 * (i1 * i1 - (c * c).trace());
    const double j = det;
    const Dual2d phi = m.eval({i1, i2, j});
    const Eigen::Matrix3d cinv = c.inverse();
    const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity();

    const double p1 = phi.g[0], p2 = phi.g[1], pj = phi.g[2];
    s = 2.0 * p1 * eye + 2.0 * p2 * (i1 * eye - c) + j * pj * cinv;
    if (!with_tangent) return;

    const double p11 = phi.h[hess_index(0, 0)], p12 = phi.h[hess_index(0, 1)],
                 p1j = phi.h[hess_index(0, 2)], p22 = phi.h[hess_index(1, 1)],
                 p2j = phi.h[hess_index(1, 2)], pjj = phi.h[hess_index(2, 2)];

    Eigen::Matrix3d di1 = eye;
    Eigen::Matrix3d di2 = i1 * eye - c;
    Eigen::Matrix3d dj = 0.5 * j * cinv;
    Eigen::Matrix3d a1 = p11 * di1 + p12 * di2 + p1j * dj;
    Eigen::Matrix3d a2 = p12 * di1 + p22 * di2 + p2j * dj;
    Eigen::Matrix3d aj = p1j * di1 + p2j * di2 + pjj * dj;

    for (int K = 0; K < 3; ++K)
      for (int J = 0; J < 3; ++J)
        for (int P = 0; P < 3; ++P)
          for (int Q = 0; Q < 3; ++Q) {
            double v = 2.0 * (K == J) * a1(P, Q)
                     + 2.0 * (i1 * (K == J) - c(K, J)) * a2(P, Q)
                     + 2.0 * p2 * ((P == Q) * (K == J) -
                                   0.5 * ((K == P) * (J == Q) + (K == Q) * (J == P)))
                     + cinv(K, J) * (pj * dj(P, Q) + j * aj(P, Q))
                     - 0.5 * j * pj * (cinv(K, P) * cinv(Q, J) + cinv(K, Q) * cinv(P, J));
            d[K][J][P][Q] = v;
          }
  }
};

struct ElementContribution {
  double f[6];
  double k[6][6];
  bool inverted{false};
};

ElementContribution element_forces(const Mesh2D& mesh, const PotentialModel& m,
                                   const Eigen::VectorXd& u, int e,
                                   bool with_tangent) {
  ElementContribution out{};
  const ElementGeometry geo(mesh, e);
  const DefGrad f = element_defgrad(mesh, e, u);
  const MaterialState mat(m, f, with_tangent);
  if (!mat.ok) {
    out.inverted = true;
    return out;
  }
  const Eigen::Matrix3d p = f * mat.s;  // first PK

  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 2; ++i) {
      double v = 0.0;
      for (int J = 0; J < 2; ++J) v += p(i, J) * geo.grad[a][J];
      out.f[2 * a + i] = geo.area * v;
    }

  if (!with_tangent) return out;

  // dP_iJ/dF_mN = delta_im S_JN + 2 F_iK D_KJPN F_mP
  double dp[2][2][2][2];
  for (int i = 0; i < 2; ++i)
    for (int J = 0; J < 2; ++J)
      for (int mi = 0; mi < 2; ++mi)
        for (int N = 0; N < 2; ++N) {
          double v = (i == mi) ? mat.s(J, N) : 0.0;
          for (int K = 0; K < 3; ++K)
            for (int P = 0; P < 3; ++P)
              v += 2.0 * f(i, K) * mat.d[K][J][P][N] * f(mi, P);
          dp[i][J][mi][N] = v;
        }

  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 2; ++i)
      for (int b = 0; b < 3; ++b)
        for (int mi = 0; mi < 2; ++mi) {
          double v = 0.0;
          for (int J = 0; J < 2; ++J)
            for (int N = 0; N < 2; ++N)
              v += dp[i][J][mi][N] * geo.grad[a][J] * geo.grad[b][N];
          out.k[2 * a + i][2 * b + mi] = geo.area * v;
        }
  return out;
}

}  // namespace

Bc tension_bc(const Mesh2D& mesh, double top_uy) {
  Bc bc;
  for (int n : mesh.set("bottom")) {
    bc.fixed.push_back(2 * n);
    bc.value.push_back(0.0);
    bc.fixed.push_back(2 * n + 1);
    bc.value.push_back(0.0);
  }
  for (int n : mesh.set("top")) {
    bc.fixed.push_back(2 * n);
    bc.value.push_back(0.0);
    bc.fixed.push_back(2 * n + 1);
    bc.value.push_back(top_uy);
  }
  return bc;
}

DefGrad element_defgrad(const Mesh2D& mesh, int e, const Eigen::VectorXd& u) {
  const ElementGeometry geo(mesh, e);
  const auto& el = mesh.elements[e];
  DefGrad f = DefGrad::Identity();
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 2; ++i)
      for (int J = 0; J < 2; ++J) f(i, J) += u[2 * el[a] + i] * geo.grad[a][J];
  return f;
}

Assembly residual_and_tangent(const Mesh2D& mesh, const PotentialModel& m,
                              const Eigen::VectorXd& u, bool with_tangent,
                              bool parallel) {
  const int ne = mesh.num_elements();
  std::vector<ElementContribution> contrib(ne);

#pragma omp parallel for schedule(static) if (parallel)
  for (int e = 0; e < ne; ++e)
    contrib[e] = element_forces(mesh, m, u, e, with_tangent);

  Assembly out;
  out.residual = Eigen::VectorXd::Zero(mesh.num_dofs());
  std::vector<Eigen::Triplet<double>> trips;
  if (with_tangent) trips.reserve(std::size_t(ne) * 36);
  for (int e = 0; e < ne; ++e) {
    const auto& ce = contrib[e];
    if (ce.inverted) {
      out.inverted = true;
      return out;
    }
    const auto& el = mesh.elements[e];
    int dof[6];
    for (int a = 0; a < 3; ++a) {
      dof[2 * a] = 2 * el[a];
      dof[2 * a + 1] = 2 * el[a] + 1;
    }
    for (int r = 0; r < 6; ++r) {
      out.residual[dof[r]] += ce.f[r];
      if (with_tangent)
        for (int c = 0; c < 6; ++c) trips.emplace_back(dof[r], dof[c], ce.k[r][c]);
    }
  }
  if (with_tangent) {
    out.tangent.resize(mesh.num_dofs(), mesh.num_dofs());
    out.tangent.setFromTriplets(trips.begin(), trips.end());
  }
  return out;
}

double total_energy(const Mesh2D& mesh, const PotentialModel& m,
                    const Eigen::VectorXd& u) {
  double e_total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementGeometry geo(mesh, e);
    const DefGrad f = element_defgrad(mesh, e, u);
    e_total += geo.area * m.eval(invariants_of(f)).v;
  }
  return e_total;
}

namespace {

std::vector<int> free_dof_map(int ndof, const Bc& bc, std::vector<int>& free_list) {
  std::vector<int> map(ndof, -1);
  std::vector<char> fixed(ndof, 0);
  for (int d : bc.fixed) fixed[d] = 1;
  for (int d = 0; d < ndof; ++d)
    if (!fixed[d]) {
      map[d] = static_cast<int>(free_list.size());
      free_list.push_back(d);
    }
  return map;
}

}  // namespace

NewtonReport solve_state(const Mesh2D& mesh, const PotentialModel& m,
                         Eigen::VectorXd& u, const Bc& bc, double factor,
                         int max_iters) {
  NewtonReport rep;
  for (std::size_t i = 0; i < bc.fixed.size(); ++i)
    u[bc.fixed[i]] = factor * bc.value[i];

  std::vector<int> free_list;
  const std::vector<int> map = free_dof_map(mesh.num_dofs(), bc, free_list);
  const int nf = static_cast<int>(free_list.size());

  for (int it = 0; it < max_iters; ++it) {
    const Assembly asm_ = residual_and_tangent(mesh, m, u);
    if (asm_.inverted) return rep;
    const double tol = 1e-10 * std::max(1.0, asm_.residual.norm());
    Eigen::VectorXd rf(nf);
    for (int i = 0; i < nf; ++i) rf[i] = asm_.residual[free_list[i]];
    if (rf.norm() < tol) {
      rep.converged = true;
      rep.iterations = it;
      return rep;
    }

    std::vector<Eigen::Triplet<double>> trips;
    for (int col = 0; col < asm_.tangent.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator jt(asm_.tangent, col); jt; ++jt) {
        const int r = map[jt.row()], c = map[jt.col()];
        if (r >= 0 && c >= 0) trips.emplace_back(r, c, jt.value());
      }
    Eigen::SparseMatrix<double> kff(nf, nf);
    kff.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(kff);
    if (lu.info() != Eigen::Success) return rep;
    const Eigen::VectorXd du = lu.solve(-rf);
    for (int i = 0; i < nf; ++i) u[free_list[i]] += du[i];
    rep.iterations = it + 1;
  }
  return rep;
}

bool solve_increment(const Mesh2D& mesh, const PotentialModel& m, Eigen::VectorXd& u,
                     const Bc& bc, double from_factor, double to_factor,
                     int max_cuts) {
  const Eigen::VectorXd u_in = u;
  const NewtonReport rep = solve_state(mesh, m, u, bc, to_factor);
  if (rep.converged) return true;
  if (max_cuts <= 0) return false;
  u = u_in;
  const double mid = 0.5 * (from_factor + to_factor);
  return solve_increment(mesh, m, u, bc, from_factor, mid, max_cuts - 1) &&
         solve_increment(mesh, m, u, bc, mid, to_factor, max_cuts - 1);
}

double reaction_force(const Mesh2D& mesh, const PotentialModel& m,
                      const Eigen::VectorXd& u, const std::string& set_name,
                      int direction) {
  const Assembly asm_ = residual_and_tangent(mesh, m, u, /*with_tangent=*/false);
  if (asm_.inverted) throw std::runtime_error("inverted element in reaction evaluation");
  double f = 0.0;
  for (int n : mesh.set(set_name)) f += asm_.residual[2 * n + direction];
  return f;
}

DicDataset synth_dic(const Mesh2D& mesh, const PotentialModel& m,
                     const LoadSchedule& schedule, double noise_rel,
                     std::uint64_t seed) {
  double height = 0.0;
  for (const auto& n : mesh.nodes) height = std::max(height, n.y());
  const Bc bc = tension_bc(mesh, schedule.total_uy);

  DicDataset out;
  out.seed = seed;
  out.noise = noise_rel;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(mesh.num_dofs());
  double factor = 0.0;
  for (int inc = 1; inc <= schedule.increments; ++inc) {
    const double next = double(inc) / schedule.increments;
    if (!solve_increment(mesh, m, u, bc, factor, next))
      throw std::runtime_error("load increment failed to converge");
    factor = next;
    if (std::find(schedule.record.begin(), schedule.record.end(), inc) ==
        schedule.record.end())
      continue;
    DicStep step;
    step.strain = factor * schedule.total_uy / height;
    step.force = reaction_force(mesh, m, u, "top", 1);
    step.u = u;
    if (noise_rel > 0.0) {
      const double amp = noise_rel * u.cwiseAbs().maxCoeff();
      step.u += grf_noise(mesh, 0.33, amp, seed + std::uint64_t(inc) * 7919u);
    }
    out.steps.push_back(std::move(step));
  }
  return out;
}

void save_dic(const DicDataset& d, const std::filesystem::path& file) {
  nlohmann::json j;
  j["seed"] = d.seed;
  j["noise"] = d.noise;
  for (const auto& s : d.steps) {
    nlohmann::json js;
    js["strain"] = s.strain;
    js["force"] = s.force;
    js["u"] = std::vector<double>(s.u.data(), s.u.data() + s.u.size());
    j["steps"].push_back(std::move(js));
  }
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write dataset: " + file.string());
  out << j.dump() << "\n";
}

DicDataset load_dic(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open dataset: " + file.string());
  const nlohmann::json j = nlohmann::json::parse(in);
  DicDataset d;
  d.seed = j.at("seed");
  d.noise = j.at("noise");
  for (const auto& js : j.at("steps")) {
    DicStep s;
    s.strain = js.at("strain");
    s.force = js.at("force");
    const auto uv = js.at("u").get<std::vector<double>>();
    s.u = Eigen::Map<const Eigen::VectorXd>(uv.data(), uv.size());
    d.steps.push_back(std::move(s));
  }
  return d;
}

void write_vtk(const Mesh2D& mesh, const Eigen::VectorXd& u,
               const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write VTK file: " + file.string());
  out << "# vtk DataFile Version 3.0\ndisplacement field\nASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n"
      << "POINTS " << mesh.num_nodes() << " double\n";
  for (const auto& n : mesh.nodes) out << n.x() << " " << n.y() << " 0\n";
  out << "CELLS " << mesh.num_elements() << " " << 4 * mesh.num_elements() << "\n";
  for (const auto& el : mesh.elements)
    out << "3 " << el[0] << " " << el[1] << " " << el[2] << "\n";
  out << "CELL_TYPES " << mesh.num_elements() << "\n";
  for (int e = 0; e < mesh.num_elements(); ++e) out << "5\n";
  out << "POINT_DATA " << mesh.num_nodes() << "\nVECTORS displacement double\n";
  for (int n = 0; n < mesh.num_nodes(); ++n)
    out << u[2 * n] << " " << u[2 * n + 1] << " 0\n";
}

}  // namespace hyperfit
