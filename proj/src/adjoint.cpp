#include "hyperfit/adjoint.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <stdexcept>

namespace hyperfit {

namespace {

Eigen::VectorXd lumped_areas(const Mesh2D& mesh) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double ae = element_area(mesh, e) / 3.0;
    for (int n : mesh.elements[e]) a[n] += ae;
  }
  return a;
}

struct StepState {
  Eigen::VectorXd u;
  Eigen::SparseMatrix<double> tangent;
  double force;
};

std::vector<StepState> solve_states(const CalibrationProblem& p,
                                    const SparseModel& model) {
  const Bc bc = tension_bc(p.mesh, p.schedule.total_uy);
  std::vector<StepState> states;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(p.mesh.num_dofs());
  double factor = 0.0;
  for (int inc = 1; inc <= p.schedule.increments; ++inc) {
    const double next = double(inc) / p.schedule.increments;
    if (!solve_increment(p.mesh, model, u, bc, factor, next))
      throw std::runtime_error("state solve failed during calibration");
    factor = next;
    if (std::find(p.schedule.record.begin(), p.schedule.record.end(), inc) ==
        p.schedule.record.end())
      continue;
    Assembly a = residual_and_tangent(p.mesh, model, u);
    StepState s;
    s.u = u;
    s.tangent = std::move(a.tangent);
    s.force = 0.0;
    for (int n : p.mesh.set("top")) s.force += a.residual[2 * n + 1];
    states.push_back(std::move(s));
  }
  if (states.size() != p.dic.steps.size())
    throw std::runtime_error("recorded steps do not match the dataset");
  return states;
}

// Residual derivative with respect to parameter k at a frozen state.
Eigen::VectorXd residual_theta_derivative(const Mesh2D& mesh, const SparseModel& model,
                                          const Eigen::VectorXd& u, int k) {
  Eigen::VectorXd dr = Eigen::VectorXd::Zero(mesh.num_dofs());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const DefGrad f = element_defgrad(mesh, e, u);
    const Eigen::Matrix3d c = f.transpose() * f;
    const double i1 = c.trace();
    const double i2 = 0.5 * (i1 * i1 - (c * c).trace());
    const double j = f.determinant();
    const Dual2<D1> phi = model.eval_param({i1, i2, j}, k);
    const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity();
    const Eigen::Matrix3d s_d = 2.0 * phi.g[0].d * eye +
                                2.0 * phi.g[1].d * (i1 * eye - c) +
                                j * phi.g[2].d * c.inverse();
    const Eigen::Matrix3d p_d = f * s_d;

    // shape gradients (same geometry factors as the assembly)
    const auto& el = mesh.elements[e];
    const Eigen::Vector2d x0 = mesh.nodes[el[0]], x1 = mesh.nodes[el[1]],
                          x2 = mesh.nodes[el[2]];
    const double det = (x1.x() - x0.x()) * (x2.y() - x0.y()) -
                       (x2.x() - x0.x()) * (x1.y() - x0.y());
    const double area = 0.5 * det;
    const double b[3] = {x1.y() - x2.y(), x2.y() - x0.y(), x0.y() - x1.y()};
    const double cc[3] = {x2.x() - x1.x(), x0.x() - x2.x(), x1.x() - x0.x()};
    for (int a = 0; a < 3; ++a) {
      const double g0 = b[a] / det, g1 = cc[a] / det;
      for (int i = 0; i < 2; ++i)
        dr[2 * el[a] + i] += area * (p_d(i, 0) * g0 + p_d(i, 1) * g1);
    }
  }
  return dr;
}

struct DofSplit {
  std::vector<int> free_list;
  std::vector<int> map;  // dof -> free index or -1

  DofSplit(int ndof, const Bc& bc) : map(ndof, -1) {
    std::vector<char> fixed(ndof, 0);
    for (int d : bc.fixed) fixed[d] = 1;
    for (int d = 0; d < ndof; ++d)
      if (!fixed[d]) {
        map[d] = static_cast<int>(free_list.size());
        free_list.push_back(d);
      }
  }
};

ObjectiveParts misfits(const CalibrationProblem& p, const std::vector<StepState>& states,
                       const Eigen::VectorXd& areas, double alpha1,
                       const std::vector<double>& theta) {
  ObjectiveParts parts;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const Eigen::VectorXd& u = states[s].u;
    const Eigen::VectorXd& d = p.dic.steps[s].u;
    for (int n = 0; n < p.mesh.num_nodes(); ++n) {
      const double dx = u[2 * n] - d[2 * n], dy = u[2 * n + 1] - d[2 * n + 1];
      parts.disp += 0.5 * areas[n] * (dx * dx + dy * dy);
    }
    const double df = states[s].force - p.dic.steps[s].force;
    parts.force += 0.5 * alpha1 * df * df;
  }
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double d = theta[k] - p.theta0[k];
    parts.reg += p.cfg.alpha2 * d * d;
  }
  parts.total = parts.disp + parts.force + parts.reg;
  return parts;
}

}  // namespace

double resolve_alpha1(const CalibrationProblem& p) {
  if (p.cfg.alpha1 >= 0.0) return p.cfg.alpha1;
  SparseModel model = p.model;
  model.set_params(p.theta0);
  const auto states = solve_states(p, model);
  const Eigen::VectorXd areas = lumped_areas(p.mesh);
  const ObjectiveParts parts = misfits(p, states, areas, 1.0, p.theta0);
  return parts.force > 0.0 ? parts.disp / (2.0 * parts.force) : 1.0;
}

ObjectiveParts objective(const CalibrationProblem& p, const std::vector<double>& theta) {
  SparseModel model = p.model;
  model.set_params(theta);
  const auto states = solve_states(p, model);
  const double alpha1 = resolve_alpha1(p);
  return misfits(p, states, lumped_areas(p.mesh), alpha1, theta);
}

std::vector<double> gradient(const CalibrationProblem& p,
                             const std::vector<double>& theta,
                             ObjectiveParts* parts_out) {
  SparseModel model = p.model;
  model.set_params(theta);
  const auto states = solve_states(p, model);
  const Eigen::VectorXd areas = lumped_areas(p.mesh);
  const double alpha1 = resolve_alpha1(p);
  const ObjectiveParts parts = misfits(p, states, areas, alpha1, theta);
  if (parts_out) *parts_out = parts;

  const Bc bc = tension_bc(p.mesh, p.schedule.total_uy);
  const DofSplit split(p.mesh.num_dofs(), bc);
  const int nf = static_cast<int>(split.free_list.size());
  const auto& top = p.mesh.set("top");

  std::vector<double> g(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k)
    g[k] = 2.0 * p.cfg.alpha2 * (theta[k] - p.theta0[k]);

  for (std::size_t s = 0; s < states.size(); ++s) {
    const StepState& st = states[s];
    const double df = st.force - p.dic.steps[s].force;

    // dJ/du on free dofs: lumped displacement misfit + force-misfit chain
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
    for (int i = 0; i < nf; ++i) {
      const int dof = split.free_list[i];
      rhs[i] = areas[dof / 2] * (st.u[dof] - p.dic.steps[s].u[dof]);
    }
    // rows of K on the constrained top dofs, restricted to free columns
    std::vector<char> is_top_y(p.mesh.num_dofs(), 0);
    for (int n : top) is_top_y[2 * n + 1] = 1;
    for (int col = 0; col < st.tangent.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(st.tangent, col); it; ++it) {
        if (!is_top_y[it.row()]) continue;
        const int c = split.map[it.col()];
        if (c >= 0) rhs[c] += alpha1 * df * it.value();
      }

    // adjoint solve with the transpose reduced tangent
    std::vector<Eigen::Triplet<double>> trips;
    for (int col = 0; col < st.tangent.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(st.tangent, col); it; ++it) {
        const int r = split.map[it.row()], c = split.map[it.col()];
        if (r >= 0 && c >= 0) trips.emplace_back(c, r, it.value());
      }
    Eigen::VectorXd v(nf);
    if (nf > 0) {  // fully constrained meshes have no adjoint unknowns
      Eigen::SparseMatrix<double> ktt(nf, nf);
      ktt.setFromTriplets(trips.begin(), trips.end());
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(ktt);
      if (lu.info() != Eigen::Success)
        throw std::runtime_error("singular tangent in adjoint solve");
      v = lu.solve(-rhs);
    }

    for (std::size_t k = 0; k < theta.size(); ++k) {
      const Eigen::VectorXd dr =
          residual_theta_derivative(p.mesh, model, st.u, static_cast<int>(k));
      double acc = 0.0;
      for (int i = 0; i < nf; ++i) acc += v[i] * dr[split.free_list[i]];
      double df_dtheta = 0.0;
      for (int n : top) df_dtheta += dr[2 * n + 1];
      g[k] += acc + alpha1 * df * df_dtheta;
    }
  }
  return g;
}

CalibrationResult calibrate(const CalibrationProblem& p,
                            const std::filesystem::path& history_csv) {
  CalibrationProblem prob = p;
  prob.cfg.alpha1 = resolve_alpha1(p);  // freeze the balance at theta0

  const std::vector<int> mask = sparse_positivity_mask(prob.model.variant());
  const auto project = [&mask](std::vector<double>& th) {
    for (int i : mask)
      if (th[i] < 0.0) th[i] = 0.0;
  };

  const std::size_t n = prob.theta0.size();
  std::vector<double> theta = prob.theta0;
  project(theta);

  std::ofstream hist;
  if (!history_csv.empty()) {
    hist.open(history_csv);
    if (!hist) throw std::runtime_error("cannot write history: " + history_csv.string());
    hist << "iter,total,disp,force,reg,grad_norm,step\n";
  }

  CalibrationResult res;
  ObjectiveParts parts;
  std::vector<double> g = gradient(prob, theta, &parts);

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;

  const auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * b[i];
    return d;
  };
  const auto norm = [&dot](const std::vector<double>& a) { return std::sqrt(dot(a, a)); };

  for (int iter = 0; iter < prob.cfg.max_iters; ++iter) {
    const double gn = norm(g);
    if (hist.is_open())
      hist << iter << ',' << parts.total << ',' << parts.disp << ',' << parts.force
           << ',' << parts.reg << ',' << gn << ',' << (res.history.empty() ? 0.0 : res.history.back().step)
           << "\n";
    res.history.push_back({iter, parts, gn, 0.0});
    if (gn < prob.cfg.grad_tol) {
      res.converged = true;
      break;
    }

    // two-loop recursion
    std::vector<double> q = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * dot(s_hist[i], q);
      for (std::size_t j = 0; j < n; ++j) q[j] -= alpha[i] * y_hist[i][j];
    }
    if (!s_hist.empty()) {
      const double gamma =
          dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
      for (auto& v : q) v *= gamma;
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * dot(y_hist[i], q);
      for (std::size_t j = 0; j < n; ++j) q[j] += (alpha[i] - beta) * s_hist[i][j];
    }
    std::vector<double> dir(n);
    for (std::size_t j = 0; j < n; ++j) dir[j] = -q[j];
    if (dot(dir, g) >= 0.0)
      for (std::size_t j = 0; j < n; ++j) dir[j] = -g[j];

    // Armijo backtracking
    const double slope = dot(dir, g);
    double step = 1.0;
    std::vector<double> theta_new(n);
    ObjectiveParts parts_new;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt) {
      for (std::size_t j = 0; j < n; ++j) theta_new[j] = theta[j] + step * dir[j];
      project(theta_new);
      try {
        parts_new = objective(prob, theta_new);
        if (parts_new.total <= parts.total + 1e-4 * step * slope) {
          accepted = true;
          break;
        }
      } catch (const std::runtime_error&) {
        // state solve failed for this trial step; shrink and retry
      }
      step *= 0.5;
    }
    if (!accepted) break;

    std::vector<double> g_new = gradient(prob, theta_new);
    std::vector<double> sk(n), yk(n);
    for (std::size_t j = 0; j < n; ++j) {
      sk[j] = theta_new[j] - theta[j];
      yk[j] = g_new[j] - g[j];
    }
    const double sy = dot(sk, yk);
    if (sy > 1e-12) {
      s_hist.push_back(sk);
      y_hist.push_back(yk);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > prob.cfg.lbfgs_memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    theta = theta_new;
    g = std::move(g_new);
    parts = parts_new;
    if (!res.history.empty()) res.history.back().step = step;
  }

  res.theta = theta;
  return res;
}

}  // namespace hyperfit
