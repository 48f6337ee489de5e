#include "hyperfit/l0_train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "hyperfit/polyconvexity.hpp"

namespace hyperfit {

namespace {
// shift inside the expected-L0 sigmoid: -beta * log(-gamma/zeta)
const double kL0Shift = -GateParams::kBeta * std::log(-GateParams::kGamma / GateParams::kZeta);
constexpr double kInputTau = 1e-3;
}  // namespace

double GateParams::gate_from_u(double log_alpha, double u) {
  const double s = sigmoid((std::log(u) - std::log1p(-u) + log_alpha) / kBeta);
  return std::clamp(s * (kZeta - kGamma) + kGamma, 0.0, 1.0);
}

double GateParams::deterministic_gate(double log_alpha) {
  const double s = sigmoid(log_alpha / kBeta);
  return std::clamp(s * (kZeta - kGamma) + kGamma, 0.0, 1.0);
}

double l0_complexity(const GateParams& g) {
  double c = 0.0;
  for (double la : g.log_alpha) c += sigmoid(la + kL0Shift);
  return c;
}

double input_dependency_penalty(const PotentialModel& m,
                                const std::vector<InvariantTriplet>& points) {
  if (points.empty()) throw std::invalid_argument("need at least one evaluation point");
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  for (const auto& t : points) {
    const Dual2d phi = m.eval(t);
    for (int k = 0; k < 3; ++k) mean[k] += std::fabs(phi.g[k]);
  }
  double p = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double gap = kInputTau - mean[k] / points.size();
    if (gap > 0.0) p += gap * gap;
  }
  return p;
}

TrainSchedule TrainSchedule::desk_scale() {
  TrainSchedule s;
  s.epochs = 1200;
  s.lr_step = 300;
  s.penalty_activation = 430;
  s.warmup = 214;
  return s;
}

std::vector<double> GatedNetwork::deterministic_gates() const {
  std::vector<double> z(gates.log_alpha.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    z[i] = GateParams::deterministic_gate(gates.log_alpha[i]);
  return z;
}

std::vector<double> GatedNetwork::rounded_gates(double threshold) const {
  std::vector<double> z = deterministic_gates();
  for (double& v : z)
    if (v < threshold) v = 0.0;
  return z;
}

std::vector<double> GatedNetwork::effective_params(const std::vector<double>& g) const {
  std::vector<double> p(w.theta.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = w.theta[i] * g[i];
  return p;
}

DenseModel GatedNetwork::effective_model() const {
  IcnnWeights eff = w;
  eff.theta = effective_params(deterministic_gates());
  return DenseModel(std::move(eff));
}

double stress_r2(const PotentialModel& m, const std::vector<LabeledSample>& data) {
  if (data.empty()) throw std::invalid_argument("empty dataset");
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  for (const auto& s : data)
    for (int k = 0; k < 3; ++k) mean[k] += s.s_diag[k];
  for (auto& v : mean) v /= data.size();

  std::array<double, 3> ss_res{0.0, 0.0, 0.0}, ss_tot{0.0, 0.0, 0.0};
  for (const auto& s : data) {
    const auto c = reconstruct_diagonal_c(s.t);
    const auto pred = second_pk_diag(m, c);
    for (int k = 0; k < 3; ++k) {
      ss_res[k] += (pred[k] - s.s_diag[k]) * (pred[k] - s.s_diag[k]);
      ss_tot[k] += (s.s_diag[k] - mean[k]) * (s.s_diag[k] - mean[k]);
    }
  }
  double r2 = 0.0;
  for (int k = 0; k < 3; ++k)
    r2 += ss_tot[k] > 0.0 ? 1.0 - ss_res[k] / ss_tot[k] : (ss_res[k] == 0.0 ? 1.0 : 0.0);
  return r2 / 3.0;
}

namespace {

Rev rev_gate(const Rev& log_alpha, double u) {
  const double logit_u = std::log(u) - std::log1p(-u);
  const Rev s = sigmoid((logit_u + log_alpha) * (1.0 / GateParams::kBeta));
  return clamp01(s * (GateParams::kZeta - GateParams::kGamma) + GateParams::kGamma);
}

struct CsvWriter {
  std::ofstream out;

  explicit CsvWriter(const std::filesystem::path& p) {
    if (p.empty()) return;
    out.open(p);
    if (!out) throw std::runtime_error("cannot open telemetry file: " + p.string());
    out << "epoch,loss,stress_mse,l0_term,input_term,indicator_term,"
           "complexity,train_r2,test_r2\n";
  }

  void row(const EpochStats& e) {
    if (!out.is_open()) return;
    out << e.epoch << ',' << e.loss << ',' << e.stress_mse << ',' << e.l0_term << ','
        << e.input_term << ',' << e.indicator_term << ',' << e.complexity << ','
        << e.train_r2 << ',' << e.test_r2 << "\n";
  }
};

}  // namespace

PretrainResult pretrain(const IcnnConfig& cfg, const std::vector<LabeledSample>& data,
                        const TrainSchedule& sched, std::uint64_t seed,
                        const std::filesystem::path& telemetry_csv) {
  if (data.size() < 2) throw std::invalid_argument("need at least two samples");
  const IcnnLayout lay(cfg);

  PretrainResult res;
  res.net.w = IcnnWeights::init(cfg, seed);
  const std::size_t n = res.net.w.theta.size();
  res.net.gates.log_alpha.assign(n, 2.0);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = std::max<std::size_t>(1, (data.size() * 4) / 5);
  std::vector<LabeledSample> train, test;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_train ? train : test).push_back(data[order[i]]);
  if (test.empty()) test.push_back(train.back());

  // squared-stretch diagonals cached per training sample
  std::vector<std::array<double, 3>> c_train(train.size());
  for (std::size_t i = 0; i < train.size(); ++i)
    c_train[i] = reconstruct_diagonal_c(train[i].t);

  CsvWriter telemetry(telemetry_csv);
  std::uniform_real_distribution<double> udist(1e-6, 1.0 - 1e-6);

  Tape tape(1 << 20);
  std::vector<double> adam_m(2 * n, 0.0), adam_v(2 * n, 0.0);
  long adam_t = 0;
  std::vector<std::size_t> batch_order(train.size());
  std::iota(batch_order.begin(), batch_order.end(), 0);

  std::vector<Rev> th(n), la(n), eff(n);

  for (int epoch = 1; epoch <= sched.epochs; ++epoch) {
    const double lr = sched.lr0 * std::pow(0.1, (epoch - 1) / sched.lr_step);
    const double ramp =
        epoch < sched.penalty_activation
            ? 0.0
            : std::min(1.0, double(epoch - sched.penalty_activation) / sched.warmup);

    std::shuffle(batch_order.begin(), batch_order.end(), rng);
    EpochStats stats{epoch, 0, 0, 0, 0, 0, 0, 0, 0};
    int n_batches = 0;
    bool blew_up = false;

    for (std::size_t start = 0; start < train.size(); start += sched.batch) {
      const std::size_t stop = std::min(train.size(), start + sched.batch);
      tape.reset();
      for (std::size_t i = 0; i < n; ++i) th[i] = tape.leaf(res.net.w.theta[i]);
      for (std::size_t i = 0; i < n; ++i) la[i] = tape.leaf(res.net.gates.log_alpha[i]);
      for (std::size_t i = 0; i < n; ++i) eff[i] = rev_gate(la[i], udist(rng)) * th[i];
      const std::span<const Rev> ep(eff);

      const bool need_hessian = cfg.variant == Variant::kRelaxed && ramp > 0.0;
      Rev stress_sq(0.0), indicator_pen(0.0);
      std::array<Rev, 3> abs_grad{Rev(0.0), Rev(0.0), Rev(0.0)};

      // reference-state derivatives shared across the batch
      using F1 = Dual1<Rev>;
      using F2 = Dual2<Rev>;
      Rev norm_n;
      if (need_hessian) {
        const F2 ref = icnn_phi(cfg, lay, ep, F2::input(Rev(3.0), 0),
                                F2::input(Rev(3.0), 1), F2::input(Rev(1.0), 2));
        norm_n = 2.0 * ref.g[0] + 4.0 * ref.g[1] + ref.g[2];
      } else {
        const F1 ref = icnn_phi(cfg, lay, ep, F1::input(Rev(3.0), 0),
                                F1::input(Rev(3.0), 1), F1::input(Rev(1.0), 2));
        norm_n = 2.0 * ref.g[0] + 4.0 * ref.g[1] + ref.g[2];
      }

      for (std::size_t i = start; i < stop; ++i) {
        const std::size_t s = batch_order[i];
        const auto& t = train[s].t;
        std::array<Rev, 3> g;
        if (need_hessian) {
          F2 phi = icnn_phi(cfg, lay, ep, F2::input(Rev(t.i1), 0),
                            F2::input(Rev(t.i2), 1), F2::input(Rev(t.j), 2));
          phi.g[2] = phi.g[2] - norm_n;
          g = {phi.g[0], phi.g[1], phi.g[2]};
          Rev g1 = phi.h[hess_index(0, 0)] + (1.5 / t.i1) * phi.g[0];
          Rev g2 = phi.h[hess_index(1, 1)] + (1.5 / t.i2) * phi.g[1];
          indicator_pen = indicator_pen + hinge_sq(g1) + hinge_sq(g2);
        } else {
          F1 phi = icnn_phi(cfg, lay, ep, F1::input(Rev(t.i1), 0),
                            F1::input(Rev(t.i2), 1), F1::input(Rev(t.j), 2));
          phi.g[2] = phi.g[2] - norm_n;
          g = {phi.g[0], phi.g[1], phi.g[2]};
        }
        for (int k = 0; k < 3; ++k) abs_grad[k] = abs_grad[k] + abs(g[k]);
        for (int k = 0; k < 3; ++k) {
          const double ck = c_train[s][k];
          const Rev sk = 2.0 * g[0] + 2.0 * g[1] * (t.i1 - ck) + (t.j / ck) * g[2];
          const Rev d = sk - train[s].s_diag[k];
          stress_sq = stress_sq + d * d;
        }
      }

      const double count = 3.0 * double(stop - start);
      Rev loss = stress_sq * (1.0 / count);
      const double mse_val = val(loss);

      Rev l0_term(0.0), input_term(0.0), ind_term(0.0);
      if (ramp > 0.0) {
        Rev complexity(0.0);
        for (std::size_t i = 0; i < n; ++i)
          complexity = complexity + sigmoid(la[i] + kL0Shift);
        l0_term = (ramp * sched.w_l0) * complexity;

        Rev input_pen(0.0);
        for (int k = 0; k < 3; ++k) {
          const Rev mean = abs_grad[k] * (1.0 / double(stop - start));
          const Rev gap = relu(kInputTau - mean);
          input_pen = input_pen + gap * gap;
        }
        input_term = (ramp * sched.w_input) * input_pen;

        if (need_hessian) ind_term = (ramp * sched.w_indicator) * indicator_pen;
        loss = loss + l0_term + input_term + ind_term;
      }

      if (!std::isfinite(val(loss))) {
        blew_up = true;
        break;
      }

      stats.loss += val(loss);
      stats.stress_mse += mse_val;
      stats.l0_term += val(l0_term);
      stats.input_term += val(input_term);
      stats.indicator_term += val(ind_term);
      ++n_batches;

      const std::vector<double> grad = tape.gradient(loss);
      ++adam_t;
      const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
      const double bc1 = 1.0 - std::pow(b1, double(adam_t));
      const double bc2 = 1.0 - std::pow(b2, double(adam_t));
      for (std::size_t i = 0; i < 2 * n; ++i) {
        adam_m[i] = b1 * adam_m[i] + (1.0 - b1) * grad[i];
        adam_v[i] = b2 * adam_v[i] + (1.0 - b2) * grad[i] * grad[i];
        const double step = lr * (adam_m[i] / bc1) / (std::sqrt(adam_v[i] / bc2) + eps);
        if (i < n) {
          res.net.w.theta[i] -= step;
          if (res.net.w.nonneg[i] && res.net.w.theta[i] < 0.0) res.net.w.theta[i] = 0.0;
        } else {
          double& a = res.net.gates.log_alpha[i - n];
          a = std::clamp(a - step, -12.0, 12.0);
        }
      }
    }

    if (blew_up) {
      res.diverged = true;
      if (!telemetry_csv.empty())
        save_gated_network(res.net, telemetry_csv.parent_path() / "checkpoint.json");
      break;
    }

    if (n_batches > 0) {
      stats.loss /= n_batches;
      stats.stress_mse /= n_batches;
      stats.l0_term /= n_batches;
      stats.input_term /= n_batches;
      stats.indicator_term /= n_batches;
    }
    stats.complexity = l0_complexity(res.net.gates);
    const DenseModel snapshot = res.net.effective_model();
    stats.train_r2 = stress_r2(snapshot, train);
    stats.test_r2 = stress_r2(snapshot, test);
    telemetry.row(stats);
    res.history.push_back(stats);
  }

  const std::vector<double> rounded = res.net.rounded_gates();
  std::size_t closed = 0;
  for (double z : rounded)
    if (z == 0.0) ++closed;
  res.gate_closed_fraction = double(closed) / double(n);
  res.sparse = extract_sparse_form(res.net.w, rounded);

  IcnnWeights final_w = res.net.w;
  final_w.theta = res.net.effective_params(rounded);
  res.test_r2 = stress_r2(DenseModel(std::move(final_w)), test);
  return res;
}

void save_gated_network(const GatedNetwork& net, const std::filesystem::path& file) {
  nlohmann::json j;
  j["variant"] = variant_name(net.w.cfg.variant);
  j["form"] = "dense";
  j["layers"] = net.w.cfg.layers;
  j["hidden"] = net.w.cfg.hidden;
  j["params"] = net.w.theta;
  j["gates"] = net.gates.log_alpha;
  const Dual2d ref = net.effective_model().eval(reference_triplet());
  j["normalization"] = {{"phi0", ref.v},
                        {"n", 2.0 * ref.g[0] + 4.0 * ref.g[1] + ref.g[2]}};
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write model file: " + file.string());
  out << j.dump(2) << "\n";
}

GatedNetwork load_gated_network(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open model file: " + file.string());
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.at("form") != "dense")
    throw std::runtime_error("expected a dense model file: " + file.string());
  GatedNetwork net;
  net.w.cfg.variant = variant_from_name(j.at("variant"));
  net.w.cfg.layers = j.at("layers");
  net.w.cfg.hidden = j.at("hidden");
  net.w.theta = j.at("params").get<std::vector<double>>();
  net.w.nonneg = icnn_nonneg_mask(net.w.cfg);
  net.gates.log_alpha = j.at("gates").get<std::vector<double>>();
  validate_masks(net.w.cfg, net.w.theta);
  return net;
}

}  // namespace hyperfit
