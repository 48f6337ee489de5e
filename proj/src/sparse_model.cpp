#include "hyperfit/sparse_model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace hyperfit {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kPolyconvex: return "polyconvex";
    case Variant::kRelaxed: return "relaxed";
    case Variant::kUnconstrained: return "unconstrained";
  }
  throw std::logic_error("bad variant");
}

Variant variant_from_name(const std::string& s) {
  if (s == "polyconvex") return Variant::kPolyconvex;
  if (s == "relaxed") return Variant::kRelaxed;
  if (s == "unconstrained") return Variant::kUnconstrained;
  throw std::invalid_argument("unknown variant: " + s);
}

int sparse_param_count(Variant v) { return v == Variant::kPolyconvex ? 13 : 9; }

std::vector<int> sparse_positivity_mask(Variant v) {
  if (v == Variant::kPolyconvex) {
    // free: theta_3, theta_6 (J skips) and theta_9 (first-layer bias)
    return {0, 1, 3, 4, 6, 7, 9, 10, 11, 12};
  }
  return {};
}

SparseModel::SparseModel(Variant v, std::vector<double> theta) : variant_(v) {
  set_params(std::move(theta));
}

void SparseModel::set_params(std::vector<double> theta) {
  if (static_cast<int>(theta.size()) != sparse_param_count(variant_))
    throw std::invalid_argument("wrong parameter count for " + variant_name(variant_));
  for (double x : theta)
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite parameter");
  theta_ = std::move(theta);
}

Dual2d SparseModel::eval(const InvariantTriplet& t) const {
  return normalized_sparse_eval<double>(variant_, theta_, t);
}

Dual2d SparseModel::eval_raw(const InvariantTriplet& t) const {
  const Dual2d i1 = Dual2d::input(t.i1, 0);
  const Dual2d i2 = Dual2d::input(t.i2, 1);
  const Dual2d j = Dual2d::input(t.j, 2);
  return sparse_phi(variant_, std::span<const double>(theta_), i1, i2, j);
}

Dual2<D1> SparseModel::eval_param(const InvariantTriplet& t, int k) const {
  std::vector<D1> th(theta_.size());
  for (std::size_t i = 0; i < theta_.size(); ++i)
    th[i] = D1(theta_[i], static_cast<int>(i) == k ? 1.0 : 0.0);
  return normalized_sparse_eval<D1>(variant_, th, t);
}

SparseModel load_sparse_model(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open model file: " + file.string());
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.at("form") != "sparse")
    throw std::runtime_error("expected a sparse model file: " + file.string());
  return SparseModel(variant_from_name(j.at("variant")),
                     j.at("params").get<std::vector<double>>());
}

void save_sparse_model(const SparseModel& m, const std::filesystem::path& file) {
  nlohmann::json j;
  j["variant"] = variant_name(m.variant());
  j["form"] = "sparse";
  j["params"] = m.params();
  const Dual2d ref = m.eval_raw(reference_triplet());
  j["normalization"] = {{"phi0", ref.v},
                        {"n", 2.0 * ref.g[0] + 4.0 * ref.g[1] + ref.g[2]}};
  std::ofstream out(file);
  out << j.dump(2) << "\n";
}

std::filesystem::path fixture_dir() { return HYPERFIT_DATA_DIR; }

SparseModel pretrained_model(Variant v) {
  return load_sparse_model(fixture_dir() / ("pretrained_" + variant_name(v) + ".json"));
}

}  // namespace hyperfit
