#ifndef HYPERFIT_SPARSE_MODEL_HPP
#define HYPERFIT_SPARSE_MODEL_HPP

#include <filesystem>
#include <span>
#include <vector>

#include "hyperfit/potential.hpp"

namespace hyperfit {

enum class Variant { kPolyconvex, kRelaxed, kUnconstrained };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& s);
int sparse_param_count(Variant v);  // 13 for polyconvex, 9 otherwise

// Indices (0-based) of parameters constrained nonnegative.  Only the
// polyconvex form carries constraints; its J-channel skip weights and the
// first-layer bias stay free.
std::vector<int> sparse_positivity_mask(Variant v);

// Closed-form potentials discovered by sparsification.  The building block is
// log(e^{2x} + 1) = softplus(2x).  The relaxed and unconstrained variants
// share one algebraic form and differ only in parameter values.
template <class S, class T>
S sparse_phi(Variant v, std::span<const T> th, const S& i1, const S& i2, const S& j) {
  auto sp2 = [](const S& x) { return softplus(2.0 * x); };
  if (v == Variant::kPolyconvex) {
    return th[10] * sp2(th[11] * sp2(i2 * th[12]))
         + th[0] * sp2(th[1] * sp2(j * th[2]))
         + th[3] * sp2(th[4] * sp2(j * th[5]))
         + th[6] * sp2(th[7] * sp2(i1 * th[9] + th[8]));
  }
  return th[0] * sp2(i1 * th[1] + th[2] * sp2(i2 * th[3]))
       + th[4] * sp2(th[5] * sp2(i2 * th[6]) + th[7] * sp2(j * th[8]));
}

// Normalized closed form, generic in the parameter scalar so nested duals can
// carry d/d(theta_k) through the stress:
//   phi_hat = phi(t) - phi(ref) - n(theta) (J - 1)
template <class T>
Dual2<T> normalized_sparse_eval(Variant v, std::span<const T> th, const InvariantTriplet& t) {
  using D = Dual2<T>;
  const D i1 = D::input(T(t.i1), 0);
  const D i2 = D::input(T(t.i2), 1);
  const D j = D::input(T(t.j), 2);
  D phi = sparse_phi(v, th, i1, i2, j);

  const D r1 = D::input(T(3.0), 0);
  const D r2 = D::input(T(3.0), 1);
  const D rj = D::input(T(1.0), 2);
  const D ref = sparse_phi(v, th, r1, r2, rj);
  const T n = 2.0 * ref.g[0] + 4.0 * ref.g[1] + ref.g[2];

  phi.v = phi.v - ref.v - n * (t.j - 1.0);
  phi.g[2] = phi.g[2] - n;
  return phi;
}

// A sparsified model with its parameters exposed as design variables.
// Evaluation is always normalized.
class SparseModel final : public PotentialModel {
 public:
  SparseModel(Variant v, std::vector<double> theta);

  Dual2d eval(const InvariantTriplet& t) const override;
  std::vector<double> params() const override { return theta_; }
  std::string name() const override { return "sparse-" + variant_name(variant_); }

  Variant variant() const { return variant_; }
  void set_params(std::vector<double> theta);

  // Unnormalized energy, exposed for cross-checks.
  Dual2d eval_raw(const InvariantTriplet& t) const;

  // Normalized energy with d/d(theta_k) carried in the nested dual.
  Dual2<D1> eval_param(const InvariantTriplet& t, int k) const;

 private:
  Variant variant_;
  std::vector<double> theta_;
};

SparseModel load_sparse_model(const std::filesystem::path& file);
void save_sparse_model(const SparseModel& m, const std::filesystem::path& file);

// Shipped pre-trained parameter sets (full precision fixtures).
std::filesystem::path fixture_dir();
SparseModel pretrained_model(Variant v);

}  // namespace hyperfit

#endif
