#include "hyperfit/icnn.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace hyperfit {

IcnnLayout::IcnnLayout(const IcnnConfig& cfg) : hidden_(cfg.hidden) {
  if (cfg.layers < 1 || cfg.hidden < 1)
    throw std::invalid_argument("network needs at least one layer and one unit");
  w_off_.assign(cfg.layers, -1);
  skip_off_.assign(cfg.layers, -1);
  int pos = 0;
  for (int l = 0; l < cfg.layers; ++l) {
    if (l > 0) {
      w_off_[l] = pos;
      pos += hidden_ * hidden_;
    }
    skip_off_[l] = pos;
    pos += hidden_ * 3;
    if (l == 0) {
      bias_off_ = pos;
      pos += hidden_;
    }
  }
  out_off_ = pos;
  pos += hidden_;
  size_ = pos;
}

std::vector<std::uint8_t> icnn_nonneg_mask(const IcnnConfig& cfg) {
  const IcnnLayout lay(cfg);
  std::vector<std::uint8_t> m(lay.size(), 0);
  for (int l = 1; l < cfg.layers; ++l)
    for (int r = 0; r < cfg.hidden; ++r)
      for (int c = 0; c < cfg.hidden; ++c) m[lay.w(l, r, c)] = 1;
  for (int c = 0; c < cfg.hidden; ++c) m[lay.out(c)] = 1;
  if (cfg.variant == Variant::kPolyconvex) {
    for (int l = 0; l < cfg.layers; ++l)
      for (int r = 0; r < cfg.hidden; ++r) {
        m[lay.skip(l, r, 0)] = 1;
        m[lay.skip(l, r, 1)] = 1;
        // J channel stays free
      }
  }
  return m;
}

void validate_masks(const IcnnConfig& cfg, std::span<const double> theta) {
  const auto mask = icnn_nonneg_mask(cfg);
  if (theta.size() != mask.size()) throw std::logic_error("parameter vector size mismatch");
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!std::isfinite(theta[i])) throw std::logic_error("non-finite network weight");
    if (mask[i] && theta[i] < 0.0)
      throw std::logic_error("negative value in a nonnegativity-constrained weight slot");
  }
}

IcnnWeights IcnnWeights::init(const IcnnConfig& cfg, std::uint64_t seed) {
  IcnnWeights w;
  w.cfg = cfg;
  w.nonneg = icnn_nonneg_mask(cfg);
  w.theta.resize(w.nonneg.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(double(cfg.hidden)));
  for (std::size_t i = 0; i < w.theta.size(); ++i) {
    const double x = dist(rng);
    w.theta[i] = w.nonneg[i] ? std::fabs(x) : x;
  }
  return w;
}

DenseModel::DenseModel(IcnnWeights w) : w_(std::move(w)), lay_(w_.cfg) {
  validate_masks(w_.cfg, w_.theta);
}

Dual2d DenseModel::eval(const InvariantTriplet& t) const {
  return normalized_icnn_eval<double>(w_.cfg, lay_, w_.theta, t);
}

std::string DenseModel::name() const { return "icnn-" + variant_name(w_.cfg.variant); }

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

}  // namespace

SparseExtraction extract_sparse_form(const IcnnWeights& w,
                                     std::span<const double> gate_values) {
  const IcnnConfig& cfg = w.cfg;
  const IcnnLayout lay(cfg);
  if (gate_values.size() != w.theta.size())
    throw std::invalid_argument("gate vector size mismatch");

  std::vector<double> eff(w.theta.size());
  for (std::size_t i = 0; i < eff.size(); ++i) eff[i] = w.theta[i] * gate_values[i];

  // reachability from the output, layer by layer
  std::vector<std::vector<std::uint8_t>> alive(cfg.layers,
                                               std::vector<std::uint8_t>(cfg.hidden, 0));
  for (int c = 0; c < cfg.hidden; ++c)
    if (eff[lay.out(c)] != 0.0) alive[cfg.layers - 1][c] = 1;
  for (int l = cfg.layers - 1; l >= 1; --l)
    for (int r = 0; r < cfg.hidden; ++r)
      if (alive[l][r])
        for (int c = 0; c < cfg.hidden; ++c)
          if (eff[lay.w(l, r, c)] != 0.0) alive[l - 1][c] = 1;

  SparseExtraction out;
  bool any_input = false;
  auto keep = [&](int idx) {
    out.surviving.push_back(eff[idx]);
    ++out.surviving_count;
  };
  for (int l = 0; l < cfg.layers; ++l)
    for (int r = 0; r < cfg.hidden; ++r) {
      if (!alive[l][r]) continue;
      if (l > 0)
        for (int c = 0; c < cfg.hidden; ++c)
          if (alive[l - 1][c] && eff[lay.w(l, r, c)] != 0.0) keep(lay.w(l, r, c));
      for (int ch = 0; ch < 3; ++ch)
        if (eff[lay.skip(l, r, ch)] != 0.0) {
          keep(lay.skip(l, r, ch));
          any_input = true;
        }
      if (l == 0 && eff[lay.bias(r)] != 0.0) keep(lay.bias(r));
    }
  for (int c = 0; c < cfg.hidden; ++c)
    if (eff[lay.out(c)] != 0.0) keep(lay.out(c));

  out.constant = !any_input || out.surviving_count == 0;

  // readable nested-softplus expression of the surviving terms
  const char* ch_name[3] = {"I1", "I2", "J"};
  std::vector<std::string> prev(cfg.hidden), cur(cfg.hidden);
  for (int l = 0; l < cfg.layers; ++l) {
    for (int r = 0; r < cfg.hidden; ++r) {
      cur[r].clear();
      if (!alive[l][r]) continue;
      std::string pre;
      auto add_term = [&](const std::string& term) {
        if (!pre.empty()) pre += " + ";
        pre += term;
      };
      if (l > 0)
        for (int c = 0; c < cfg.hidden; ++c)
          if (alive[l - 1][c] && eff[lay.w(l, r, c)] != 0.0 && !prev[c].empty())
            add_term(num(eff[lay.w(l, r, c)]) + "*" + prev[c]);
      for (int ch = 0; ch < 3; ++ch)
        if (eff[lay.skip(l, r, ch)] != 0.0)
          add_term(num(eff[lay.skip(l, r, ch)]) + "*" + ch_name[ch]);
      if (l == 0 && eff[lay.bias(r)] != 0.0) add_term(num(eff[lay.bias(r)]));
      if (pre.empty()) pre = "0";
      cur[r] = "sp(" + pre + ")";
    }
    std::swap(prev, cur);
  }
  std::string total;
  for (int c = 0; c < cfg.hidden; ++c)
    if (eff[lay.out(c)] != 0.0 && !prev[c].empty()) {
      if (!total.empty()) total += " + ";
      total += num(eff[lay.out(c)]) + "*" + prev[c];
    }
  out.expression = total.empty() ? "0" : total;
  return out;
}

}  // namespace hyperfit
