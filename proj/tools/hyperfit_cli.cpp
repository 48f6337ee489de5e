#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <json.hpp>

#include "hyperfit/adjoint.hpp"
#include "hyperfit/materials.hpp"
#include "hyperfit/grf.hpp"
#include "hyperfit/io.hpp"
#include "hyperfit/l0_train.hpp"
#include "hyperfit/matpoint.hpp"
#include "hyperfit/polyconvexity.hpp"

namespace fs = std::filesystem;
using namespace hyperfit;

namespace {

std::shared_ptr<const PotentialModel> resolve_model(const std::string& spec) {
  if (fs::exists(spec)) {
    const auto j = nlohmann::json::parse(std::ifstream(spec));
    if (j.at("form") == "sparse")
      return std::make_shared<SparseModel>(load_sparse_model(spec));
    return std::make_shared<DenseModel>(load_gated_network(spec).effective_model());
  }
  return normalize(make_analytic_material(spec));
}

struct Global {
  std::uint64_t seed{0};
  std::string out_dir{"."};
  std::string config;

  fs::path out(const std::string& name) const {
    fs::create_directories(out_dir);
    return fs::path(out_dir) / name;
  }

  void manifest(const std::string& command) const {
    std::string cfg = config;
    if (!cfg.empty() && fs::exists(cfg)) {
      std::ifstream in(cfg);
      cfg.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    write_manifest(out("manifest.json"), command, seed, cfg);
  }
};

std::vector<InvariantTriplet> triplets_of(const std::vector<LabeledSample>& data) {
  std::vector<InvariantTriplet> t;
  for (const auto& s : data) t.push_back(s.t);
  return t;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperelastic constitutive-model discovery toolkit"};
  app.require_subcommand(1);

  Global g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_option("--config", g.config, "configuration file recorded in the manifest");

  // ---- sample -------------------------------------------------------------
  auto* sample = app.add_subcommand("sample", "invariant cloud and triplet selection");
  SamplerConfig sampler;
  SaConfig sa;
  std::string sample_out = "triplets.csv";
  sample->add_option("--n-cloud", sampler.n_cloud);
  sample->add_option("--delta", sampler.delta);
  sample->add_option("--k", sampler.k_select);
  sample->add_option("--sa-iters", sa.i_max);
  sample->add_option("--out", sample_out);

  // ---- gen-data -----------------------------------------------------------
  auto* gen = app.add_subcommand("gen-data", "labeled invariant/stress dataset");
  std::string gen_material = "gent-gent";
  std::string gen_out = "data.csv";
  gen->add_option("--material", gen_material);
  gen->add_option("--n-cloud", sampler.n_cloud);
  gen->add_option("--delta", sampler.delta);
  gen->add_option("--k", sampler.k_select);
  gen->add_option("--sa-iters", sa.i_max);
  gen->add_option("--out", gen_out);

  // ---- pretrain -----------------------------------------------------------
  auto* pre = app.add_subcommand("pretrain", "sparsified network pre-training");
  std::string pre_variant = "polyconvex", pre_data, pre_out = "model.json",
              pre_telemetry = "telemetry.csv";
  IcnnConfig icnn;
  TrainSchedule sched = TrainSchedule::desk_scale();
  pre->add_option("--variant", pre_variant);
  pre->add_option("--data", pre_data)->required();
  pre->add_option("--hidden", icnn.hidden);
  pre->add_option("--layers", icnn.layers);
  pre->add_option("--epochs", sched.epochs);
  pre->add_option("--out", pre_out);
  pre->add_option("--telemetry", pre_telemetry);

  // ---- indicator ----------------------------------------------------------
  auto* ind = app.add_subcommand("indicator", "polyconvexity indicator over points");
  std::string ind_model, ind_data, ind_out = "indicator.csv";
  ind->add_option("--model", ind_model)->required();
  ind->add_option("--data", ind_data)->required();
  ind->add_option("--out", ind_out);

  // ---- validate -----------------------------------------------------------
  auto* val = app.add_subcommand("validate", "canonical-mode curves against truth");
  std::string val_model, val_truth = "gent-gent", val_out = "validation.csv";
  val->add_option("--model", val_model)->required();
  val->add_option("--truth", val_truth);
  val->add_option("--out", val_out);

  // ---- synth-dic ----------------------------------------------------------
  auto* dic = app.add_subcommand("synth-dic", "synthetic full-field dataset");
  std::string dic_material = "neo-hookean", dic_out = "dic.json",
              dic_mesh_out = "mesh.json";
  double dic_noise = 0.005;
  int dic_nx = 8, dic_ny = 14;
  dic->add_option("--material", dic_material);
  dic->add_option("--noise", dic_noise);
  dic->add_option("--nx", dic_nx);
  dic->add_option("--ny", dic_ny);
  dic->add_option("--out", dic_out);
  dic->add_option("--mesh-out", dic_mesh_out);

  // ---- transfer -----------------------------------------------------------
  auto* tr = app.add_subcommand("transfer", "adjoint calibration against DIC data");
  std::string tr_model, tr_dic, tr_mesh, tr_out = "calibrated.json",
              tr_history = "history.csv", tr_alpha1 = "auto";
  int tr_iters = 50;
  tr->add_option("--model", tr_model)->required();
  tr->add_option("--dic", tr_dic)->required();
  tr->add_option("--mesh", tr_mesh)->required();
  tr->add_option("--alpha1", tr_alpha1);
  tr->add_option("--max-iters", tr_iters);
  tr->add_option("--out", tr_out);
  tr->add_option("--history", tr_history);

  // ---- report -------------------------------------------------------------
  auto* rep = app.add_subcommand("report", "collate run artifacts");
  std::string rep_dir = ".";
  rep->add_option("--run-dir", rep_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) {
      g.manifest("sample");
      const auto cloud = lhs_defgrads(sampler, g.seed);
      const auto sel = select_triplets(cloud, sampler, sa, g.seed);
      std::ofstream out(g.out(sample_out));
      out.precision(17);
      out << "I1,I2,J\n";
      for (const auto& p : sel.points)
        out << p.t.i1 << ',' << p.t.i2 << ',' << p.t.j << "\n";
      std::cout << "selected " << sel.points.size() << " triplets, d_min=" << sel.d_min
                << " d_nn_mean=" << sel.d_nn_mean << "\n";
    } else if (*gen) {
      g.manifest("gen-data");
      const auto truth = normalize(make_analytic_material(gen_material));
      const auto cloud = lhs_defgrads(sampler, g.seed);
      const auto sel = select_triplets(cloud, sampler, sa, g.seed);
      std::vector<InvariantTriplet> pts;
      std::vector<DefGrad> fs_;
      for (const auto& p : sel.points) {
        pts.push_back(p.t);
        fs_.push_back(p.f);
      }
      write_labeled_csv(label_with(*truth, pts), g.out(gen_out), &fs_);
      std::cout << "wrote " << pts.size() << " labeled samples\n";
    } else if (*pre) {
      g.manifest("pretrain");
      icnn.variant = variant_from_name(pre_variant);
      const auto data = read_labeled_csv(pre_data);
      const auto result = pretrain(icnn, data, sched, g.seed, g.out(pre_telemetry));
      if (result.diverged) {
        std::cerr << "training diverged; checkpoint written\n";
        return 1;
      }
      save_gated_network(result.net, g.out(pre_out));
      std::cout << "test R2=" << result.test_r2
                << " gates closed=" << 100.0 * result.gate_closed_fraction << "%\n"
                << "sparse form: " << result.sparse.expression << "\n";
    } else if (*ind) {
      g.manifest("indicator");
      const auto model = resolve_model(ind_model);
      const auto data = read_labeled_csv(ind_data);
      std::ofstream out(g.out(ind_out));
      out.precision(17);
      out << "I1,I2,J,g1,g2,gJ\n";
      for (const auto& s : data) {
        const IndicatorValues v = indicator(*model, s.t);
        out << s.t.i1 << ',' << s.t.i2 << ',' << s.t.j << ',' << v.g1 << ',' << v.g2
            << ',' << v.gj << "\n";
      }
    } else if (*val) {
      g.manifest("validate");
      const auto model = resolve_model(val_model);
      const auto truth = resolve_model(val_truth);
      const auto report = run_validation(*model, *truth);
      write_validation_csv(report, g.out(val_out));
      const char* names[3] = {"uniaxial", "equibiaxial", "shear"};
      for (std::size_t k = 0; k < report.scores.size(); ++k)
        std::cout << names[k] << ": R2 inside=" << report.scores[k].r2_inside
                  << " outside=" << report.scores[k].r2_outside << "\n";
    } else if (*dic) {
      g.manifest("synth-dic");
      const auto truth = resolve_model(dic_material);
      const Mesh2D mesh = make_plate_with_holes(
          3.0, 5.0, dic_nx, dic_ny,
          {{1.5, 1.25, 0.4}, {1.5, 2.5, 0.4}, {1.5, 3.75, 0.4}});
      save_mesh(mesh, g.out(dic_mesh_out));
      const DicDataset data = synth_dic(mesh, *truth, {}, dic_noise, g.seed);
      save_dic(data, g.out(dic_out));
      std::cout << "recorded " << data.steps.size() << " steps on "
                << mesh.num_elements() << " elements\n";
    } else if (*tr) {
      g.manifest("transfer");
      CalibrationProblem prob{load_mesh(tr_mesh), load_sparse_model(tr_model),
                              load_dic(tr_dic), LoadSchedule{}, CalibrationConfig{},
                              {}};
      prob.theta0 = prob.model.params();
      prob.cfg.max_iters = tr_iters;
      if (tr_alpha1 != "auto") prob.cfg.alpha1 = std::stod(tr_alpha1);
      const CalibrationResult result = calibrate(prob, g.out(tr_history));
      SparseModel calibrated(prob.model.variant(), result.theta);
      save_sparse_model(calibrated, g.out(tr_out));
      std::cout << "final objective=" << result.history.back().parts.total << " after "
                << result.history.size() << " iterations\n";
    } else if (*rep) {
      g.manifest("report");
      std::ofstream out(g.out("report.md"));
      out << "# Run summary\n\n";
      for (const auto& entry : fs::directory_iterator(rep_dir)) {
        if (entry.path().extension() != ".csv") continue;
        std::ifstream in(entry.path());
        std::string header, last, line;
        std::getline(in, header);
        while (std::getline(in, line))
          if (!line.empty()) last = line;
        out << "## " << entry.path().filename().string() << "\n\n"
            << "`" << header << "`\n\nlast row: `" << last << "`\n\n";
      }
      std::cout << "wrote report.md\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
