#ifndef HYPERFIT_ICNN_HPP
#define HYPERFIT_ICNN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hyperfit/sparse_model.hpp"

namespace hyperfit {

struct IcnnConfig {
  int layers{2};
  int hidden{200};
  Variant variant{Variant::kPolyconvex};
};

// Flat parameter layout per hidden layer l:
//   [W_l (hidden x prev), only l >= 1]  [skip_l (hidden x 3)]  [b_0, only l == 0]
// followed by the linear output weights (1 x hidden).  The first hidden state
// is z_0 = 0, so layer 0 carries no hidden-to-hidden block.
struct IcnnLayout {
  explicit IcnnLayout(const IcnnConfig& cfg);

  int w(int layer, int row, int col) const { return w_off_[layer] + row * hidden_ + col; }
  int skip(int layer, int row, int channel) const { return skip_off_[layer] + row * 3 + channel; }
  int bias(int row) const { return bias_off_ + row; }
  int out(int col) const { return out_off_ + col; }
  int size() const { return size_; }

 private:
  int hidden_;
  std::vector<int> w_off_, skip_off_;
  int bias_off_, out_off_, size_;
};

struct IcnnWeights {
  IcnnConfig cfg;
  std::vector<double> theta;
  std::vector<std::uint8_t> nonneg;  // 1 where the entry is constrained >= 0

  static IcnnWeights init(const IcnnConfig& cfg, std::uint64_t seed);
  IcnnLayout layout() const { return IcnnLayout(cfg); }
};

// Marks the constrained slots: hidden-to-hidden and output weights always,
// plus the I1/I2 skip columns for the polyconvex variant.
std::vector<std::uint8_t> icnn_nonneg_mask(const IcnnConfig& cfg);

// Throws std::logic_error when a constrained slot holds a negative value.
void validate_masks(const IcnnConfig& cfg, std::span<const double> theta);

// Raw (unnormalized) energy; S is the invariant-direction dual carrying the
// inputs, T the parameter scalar (double, or a tape variable for training).
template <class S, class T>
S icnn_phi(const IcnnConfig& cfg, const IcnnLayout& lay, std::span<const T> th,
           const S& i1, const S& i2, const S& j) {
  std::vector<S> z(cfg.hidden), next(cfg.hidden);
  for (int l = 0; l < cfg.layers; ++l) {
    for (int r = 0; r < cfg.hidden; ++r) {
      S pre = th[lay.skip(l, r, 0)] * i1 + th[lay.skip(l, r, 1)] * i2
            + th[lay.skip(l, r, 2)] * j;
      if (l == 0) {
        pre = pre + th[lay.bias(r)];
      } else {
        for (int c = 0; c < cfg.hidden; ++c) pre = pre + th[lay.w(l, r, c)] * z[c];
      }
      next[r] = softplus(pre);
    }
    std::swap(z, next);
  }
  S y = th[lay.out(0)] * z[0];
  for (int c = 1; c < cfg.hidden; ++c) y = y + th[lay.out(c)] * z[c];
  return y;
}

template <class T>
Dual2<T> normalized_icnn_eval(const IcnnConfig& cfg, const IcnnLayout& lay,
                              std::span<const T> th, const InvariantTriplet& t) {
  using D = Dual2<T>;
  D phi = icnn_phi(cfg, lay, th, D::input(T(t.i1), 0), D::input(T(t.i2), 1),
                   D::input(T(t.j), 2));
  const D ref = icnn_phi(cfg, lay, th, D::input(T(3.0), 0), D::input(T(3.0), 1),
                         D::input(T(1.0), 2));
  const T n = 2.0 * ref.g[0] + 4.0 * ref.g[1] + ref.g[2];
  phi.v = phi.v - ref.v - n * (t.j - 1.0);
  phi.g[2] = phi.g[2] - n;
  return phi;
}

// First-order-only variant for the training hot path (stress needs only the
// energy gradient).
template <class T>
Dual1<T> normalized_icnn_grad(const IcnnConfig& cfg, const IcnnLayout& lay,
                              std::span<const T> th, const InvariantTriplet& t) {
  using D = Dual1<T>;
  D phi = icnn_phi(cfg, lay, th, D::input(T(t.i1), 0), D::input(T(t.i2), 1),
                   D::input(T(t.j), 2));
  const D ref = icnn_phi(cfg, lay, th, D::input(T(3.0), 0), D::input(T(3.0), 1),
                         D::input(T(1.0), 2));
  const T n = 2.0 * ref.g[0] + 4.0 * ref.g[1] + ref.g[2];
  phi.v = phi.v - ref.v - n * (t.j - 1.0);
  phi.g[2] = phi.g[2] - n;
  return phi;
}

// Dense network as a normalized PotentialModel (weights fixed at evaluation).
class DenseModel final : public PotentialModel {
 public:
  explicit DenseModel(IcnnWeights w);

  Dual2d eval(const InvariantTriplet& t) const override;
  std::vector<double> params() const override { return w_.theta; }
  std::string name() const override;
  const IcnnWeights& weights() const { return w_; }

 private:
  IcnnWeights w_;
  IcnnLayout lay_;
};

// Pruned closed-form view of a gated network.  `expression` is a serialized
// human-readable tree of the surviving terms; `surviving` holds the nonzero
// effective weights reachable from the output.
struct SparseExtraction {
  std::string expression;
  std::vector<double> surviving;
  int surviving_count{0};
  bool constant{false};
};

SparseExtraction extract_sparse_form(const IcnnWeights& w,
                                     std::span<const double> gate_values);

}  // namespace hyperfit

#endif
