#include "hyperfit/materials.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace hyperfit {

namespace {
Dual2d make_inputs(const InvariantTriplet& t, Dual2d& i1, Dual2d& i2, Dual2d& j) {
  i1 = Dual2d::input(t.i1, 0);
  i2 = Dual2d::input(t.i2, 1);
  j = Dual2d::input(t.j, 2);
  return i1;
}
}  // namespace

Dual2d GentGent::eval(const InvariantTriplet& t) const {
  // guard band in front of the locking singularity at I1 - 3 = Jm
  if (t.i1 - 3.0 >= 0.99 * p_.jm)
    throw std::domain_error("gent-gent: I1 too close to the locking limit Jm");
  if (t.i2 <= 0.0 || t.j <= 0.0)
    throw std::domain_error("gent-gent: invalid invariants");
  Dual2d i1, i2, j;
  make_inputs(t, i1, i2, j);
  return gent_gent_phi(p_, i1, i2, j);
}

Dual2d NeoHookean::eval(const InvariantTriplet& t) const {
  if (t.j <= 0.0) throw std::domain_error("neo-hookean: J must be positive");
  Dual2d i1, i2, j;
  make_inputs(t, i1, i2, j);
  return neo_hookean_phi(p_, i1, i2, j);
}

Dual2d OgdenGeneralized::eval(const InvariantTriplet& t) const {
  if (t.i2 <= 0.0 || t.j <= 0.0)
    throw std::domain_error("ogden: invalid invariants");
  Dual2d i1, i2, j;
  make_inputs(t, i1, i2, j);
  return ogden_phi(p_, i1, i2, j);
}

std::vector<double> OgdenGeneralized::params() const {
  return {p_.c_i0[0], p_.c_0j[0], p_.c_i0[1], p_.c_0j[1], p_.c_i0[2], p_.c_0j[2], p_.kappa};
}

std::shared_ptr<const PotentialModel> make_analytic_material(const std::string& name) {
  if (name == "gent-gent") return std::make_shared<GentGent>();
  if (name == "neo-hookean") return std::make_shared<NeoHookean>();
  if (name == "ogden") return std::make_shared<OgdenGeneralized>();
  throw std::invalid_argument("unknown material: " + name);
}

std::shared_ptr<const PotentialModel> load_analytic_material(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open material file: " + file.string());
  nlohmann::json spec = nlohmann::json::parse(in);
  const std::string name = spec.at("name");
  if (name == "gent-gent") {
    GentGentParams p;
    p.mu = spec.at("mu");
    p.jm = spec.at("jm");
    p.kappa = spec.at("kappa");
    p.c2 = spec.at("c2");
    return std::make_shared<GentGent>(p);
  }
  if (name == "neo-hookean") {
    NeoHookeanParams p;
    p.mu = spec.at("mu");
    p.lambda = spec.at("lambda");
    return std::make_shared<NeoHookean>(p);
  }
  if (name == "ogden") {
    OgdenParams p;
    p.c_i0 = {spec.at("c10"), spec.at("c20"), spec.at("c30")};
    p.c_0j = {spec.at("c01"), spec.at("c02"), spec.at("c03")};
    p.kappa = spec.at("kappa");
    return std::make_shared<OgdenGeneralized>(p);
  }
  throw std::runtime_error("unknown material in fixture: " + name);
}

std::array<double, 3> second_pk_diag(const PotentialModel& m,
                                     const std::array<double, 3>& c_diag) {
  for (double l2 : c_diag)
    if (l2 <= 0.0) throw std::domain_error("C must have positive diagonal entries");
  const InvariantTriplet t = invariants_of_diagonal_c(c_diag);
  const Dual2d phi = m.eval(t);
  std::array<double, 3> s;
  for (int k = 0; k < 3; ++k)
    s[k] = 2.0 * phi.g[0] + 2.0 * phi.g[1] * (t.i1 - c_diag[k]) + t.j * phi.g[2] / c_diag[k];
  return s;
}

Eigen::Matrix3d second_pk_full(const PotentialModel& m, const Eigen::Matrix3d& c) {
  const double i1 = c.trace();
  const double i2 = 0.5 * (i1 * i1 - (c * c).trace());
  const double det = c.determinant();
  if (det <= 0.0) throw std::domain_error("C must be positive definite");
  const double j = std::sqrt(det);
  const Dual2d phi = m.eval({i1, i2, j});
  return 2.0 * phi.g[0] * Eigen::Matrix3d::Identity()
         + 2.0 * phi.g[1] * (i1 * Eigen::Matrix3d::Identity() - c)
         + j * phi.g[2] * c.inverse();
}

NormalizedModel::NormalizedModel(std::shared_ptr<const PotentialModel> base)
    : base_(std::move(base)) {
  const Dual2d ref = base_->eval(reference_triplet());
  phi0_ = ref.v;
  n_ = 2.0 * ref.g[0] + 4.0 * ref.g[1] + ref.g[2];
}

Dual2d NormalizedModel::eval(const InvariantTriplet& t) const {
  Dual2d r = base_->eval(t);
  r.v -= phi0_ + n_ * (t.j - 1.0);
  r.g[2] -= n_;
  return r;
}

std::shared_ptr<const PotentialModel> normalize(std::shared_ptr<const PotentialModel> base) {
  return std::make_shared<NormalizedModel>(std::move(base));
}

}  // namespace hyperfit
