#ifndef HYPERFIT_MATERIALS_HPP
#define HYPERFIT_MATERIALS_HPP

#include <array>
#include <filesystem>

#include "hyperfit/potential.hpp"

namespace hyperfit {

struct GentGentParams {
  double mu{2.4195};
  double jm{77.931};
  double kappa{1.20975};
  double c2{0.75 * 2.4195};
};

struct NeoHookeanParams {
  double mu{1.0};
  double lambda{0.333};
};

struct OgdenParams {
  std::array<double, 3> c_i0{1.302, 0.261, 0.246};   // c10, c20, c30
  std::array<double, 3> c_0j{0.668, 0.245, 0.143};   // c01, c02, c03
  double kappa{0.831};
};

template <class S>
S gent_gent_phi(const GentGentParams& p, const S& i1, const S& i2, const S& j) {
  return -0.5 * p.mu * p.jm * log(1.0 - (i1 - 3.0) * (1.0 / p.jm))
         - p.c2 * log(i2 * (1.0 / 3.0))
         + p.kappa * (0.5 * (j * j - 1.0) - log(j));
}

template <class S>
S neo_hookean_phi(const NeoHookeanParams& p, const S& i1, const S& /*i2*/, const S& j) {
  const S lj = log(j);
  return 0.5 * p.mu * (i1 - 3.0) - p.mu * lj + 0.5 * p.lambda * lj * lj;
}

template <class S>
S ogden_phi(const OgdenParams& p, const S& i1, const S& i2, const S& j) {
  const S i1_bar = pow(j, -2.0 / 3.0) * i1;
  const S i2_bar = pow(j, -4.0 / 3.0) * i2;
  const S a = i1_bar - 3.0;
  const S b = pow(i2_bar, -1.5) - 3.0 * std::sqrt(3.0);
  S phi = p.kappa * (j * j + pow(j, -2.0) - 2.0);
  S ap = a;
  S bp = b;
  for (int k = 0; k < 3; ++k) {
    phi = phi + p.c_i0[k] * ap + p.c_0j[k] * bp;
    ap = ap * a;
    bp = bp * b;
  }
  return phi;
}

class GentGent final : public PotentialModel {
 public:
  explicit GentGent(GentGentParams p = {}) : p_(p) {}
  Dual2d eval(const InvariantTriplet& t) const override;
  std::vector<double> params() const override { return {p_.mu, p_.jm, p_.kappa, p_.c2}; }
  std::string name() const override { return "gent-gent"; }
  const GentGentParams& material() const { return p_; }

 private:
  GentGentParams p_;
};

class NeoHookean final : public PotentialModel {
 public:
  explicit NeoHookean(NeoHookeanParams p = {}) : p_(p) {}
  Dual2d eval(const InvariantTriplet& t) const override;
  std::vector<double> params() const override { return {p_.mu, p_.lambda}; }
  std::string name() const override { return "neo-hookean"; }
  const NeoHookeanParams& material() const { return p_; }

 private:
  NeoHookeanParams p_;
};

class OgdenGeneralized final : public PotentialModel {
 public:
  explicit OgdenGeneralized(OgdenParams p = {}) : p_(p) {}
  Dual2d eval(const InvariantTriplet& t) const override;
  std::vector<double> params() const override;
  std::string name() const override { return "ogden"; }
  const OgdenParams& material() const { return p_; }

 private:
  OgdenParams p_;
};

// Loads one of the analytic materials from a JSON parameter fixture.
std::shared_ptr<const PotentialModel> load_analytic_material(const std::filesystem::path& file);
std::shared_ptr<const PotentialModel> make_analytic_material(const std::string& name);

}  // namespace hyperfit

#endif
