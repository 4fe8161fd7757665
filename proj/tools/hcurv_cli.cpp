// hcurv: dataset generation, training and evaluation front end.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hcurv/bench.hpp"
#include "hcurv/datagen.hpp"
#include "hcurv/hybrid.hpp"
#include "hcurv/neural.hpp"
#include "hcurv/preprocess.hpp"
#include "hcurv/text_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hcurv;

namespace {

std::string numerical_path(const std::string& dataset_path) { return dataset_path + ".numerical.csv"; }

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
  return out;
}

void emit(const json& j) { std::cout << j.dump() << std::endl; }

// nu = 0 means not given.
void check_nu(int nu, double h, const char* what) {
  if (nu != 0 && h != std::ldexp(1.0, -nu))
    throw std::runtime_error(std::string(what) + " spacing does not match --nu " + std::to_string(nu));
}

// "7=path" pairs for per-resolution artifacts.
std::map<int, std::string> parse_pairs(const std::vector<std::string>& items, const char* what) {
  std::map<int, std::string> out;
  for (const auto& s : items) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError(what, "expected NU=PATH, got '" + s + "'");
    out[std::stoi(s.substr(0, eq))] = s.substr(eq + 1);
  }
  return out;
}

struct DataOptions {
  std::vector<std::string> paths;
  std::uint64_t seed = 1;
  int nu = 0;
  bool balance = true;
  int bins = 20;
  double k = 2.0;
};

void add_data_options(CLI::App* cmd, DataOptions& o) {
  cmd->add_option("--data", o.paths, "Dataset files (merged in order)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Seed for balancing, splitting and training");
  cmd->add_option("--nu", o.nu, "Expected resolution level; checked against the data")->check(CLI::Range(5, 12));
  cmd->add_flag("!--no-balance", o.balance, "Skip histogram rebalancing");
  cmd->add_option("--bins", o.bins, "Histogram bins for rebalancing")->check(CLI::Range(1, 1000));
  cmd->add_option("--K", o.k, "Maximum bin ratio after rebalancing")->check(CLI::Range(1.0, 100.0));
}

// Merge -> optional rebalance -> split; shared by fit-pca and train so both
// see the same training subset for a given seed.
SplitResult prepare(const DataOptions& o, json& summary) {
  Dataset all;
  for (const auto& p : o.paths) {
    Dataset d = load_dataset(p);
    if (fs::exists(numerical_path(p))) load_numerical(d, numerical_path(p));
    merge_into(all, d);
  }
  check_nu(o.nu, all.h, "dataset");
  summary["samples_loaded"] = all.samples.size();
  if (o.balance) {
    BalanceResult b = bin_balance(all, o.bins, o.k, o.seed);
    summary["balance_skipped"] = b.unchanged_too_few_bins;
    all = std::move(b.dataset);
  }
  summary["samples_used"] = all.samples.size();
  return split(all, o.seed);
}

LabeledSet labeled(const Dataset& d) {
  LabeledSet s;
  for (const auto& smp : d.samples) {
    s.x.push_back(smp.stencil.values);
    s.y.push_back(smp.target);
  }
  return s;
}

std::vector<Feature9> rows_of(const Dataset& d) {
  std::vector<Feature9> rows;
  for (const auto& s : d.samples) rows.push_back(s.stencil.values);
  return rows;
}

std::array<int, 4> parse_hidden(const std::string& s) {
  std::array<int, 4> out{};
  std::stringstream ss(s);
  std::string tok;
  int k = 0;
  while (std::getline(ss, tok, ',')) {
    if (k == 4) throw CLI::ValidationError("--hidden", "exactly four layer sizes are required");
    out[static_cast<std::size_t>(k++)] = std::stoi(tok);
  }
  if (k != 4) throw CLI::ValidationError("--hidden", "exactly four layer sizes are required");
  return out;
}

HybridSolver load_solver(const std::string& model_path, const std::string& pca_path, double kappa_flat, double h) {
  MlpModel m = load_model(model_path);
  PcaParams p = load_pca(pca_path);
  const double kf = kappa_flat > 0.0 ? kappa_flat : m.kappa_flat;
  return HybridSolver(std::move(m), std::move(p), kf, h);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid level-set curvature estimation"};
  app.require_subcommand(1);

  // gen-sine / gen-circle
  struct GenOpts {
    int nu = 7;
    std::uint64_t seed = 1;
    double scale = 1.0;
    double kappa_min = 0.5;
    double kappa_max = 256.0 / 3.0;
    std::string out;
  };
  GenOpts gs, gc;
  auto add_gen = [&](CLI::App* c, GenOpts& o) {
    c->add_option("--nu", o.nu, "Resolution level, h = 2^-nu")->check(CLI::Range(7, 10));
    c->add_option("--seed", o.seed, "RNG seed");
    c->add_option("--scale", o.scale, "Fraction of the full sweep to run")->check(CLI::Range(1e-9, 1.0));
    c->add_option("--kappa-min", o.kappa_min, "Smallest curvature magnitude sampled");
    c->add_option("--kappa-max", o.kappa_max, "Largest curvature magnitude sampled");
    c->add_option("--out", o.out, "Output dataset file")->required();
  };
  auto* gen_sine = app.add_subcommand("gen-sine", "Generate samples from sine interfaces");
  add_gen(gen_sine, gs);
  auto* gen_circle = app.add_subcommand("gen-circle", "Generate samples from circle interfaces");
  add_gen(gen_circle, gc);

  // fit-pca
  DataOptions fp_data;
  std::string fp_kind = "pca";
  std::string fp_out;
  auto* fit = app.add_subcommand("fit-pca", "Fit the input preprocessor on the training subset");
  add_data_options(fit, fp_data);
  fit->add_option("--kind", fp_kind, "pca or std")->check(CLI::IsMember({"pca", "std"}));
  fit->add_option("--out", fp_out, "Output .pca file")->required();

  // train
  DataOptions tr_data;
  std::string tr_pca, tr_out, tr_history, tr_hidden = "64,64,64,64", tr_kind = "pca", tr_test_out;
  TrainConfig tr_cfg;
  double tr_kappa_flat = 5.0;
  bool tr_relu_first = false;
  auto* trn = app.add_subcommand("train", "Train the curvature network");
  add_data_options(trn, tr_data);
  trn->add_option("--pca", tr_pca, "Preprocessor file; fitted and written next to the model when absent");
  trn->add_option("--kind", tr_kind, "Preprocessor kind when fitting")->check(CLI::IsMember({"pca", "std"}));
  trn->add_option("--out", tr_out, "Output .mlp file")->required();
  trn->add_option("--history", tr_history, "Per-epoch CSV");
  trn->add_option("--test-out", tr_test_out, "Write the held-out test subset (with its G_h sidecar)");
  trn->add_option("--hidden", tr_hidden, "Four comma-separated hidden sizes");
  trn->add_flag("--relu-first", tr_relu_first, "Apply ReLU on the first hidden layer");
  trn->add_option("--epochs", tr_cfg.max_epochs, "Maximum epochs")->check(CLI::PositiveNumber);
  trn->add_option("--lr", tr_cfg.lr0, "Initial learning rate")->check(CLI::PositiveNumber);
  trn->add_option("--batch", tr_cfg.batch, "Batch size")->check(CLI::PositiveNumber);
  trn->add_option("--plateau-patience", tr_cfg.plateau_patience)->check(CLI::PositiveNumber);
  trn->add_option("--stop-patience", tr_cfg.stop_patience)->check(CLI::PositiveNumber);
  trn->add_option("--kappa-flat", tr_kappa_flat, "Switch threshold stored in the model")->check(CLI::PositiveNumber);

  // infer
  std::string in_model, in_pca, in_field, in_out;
  double in_kappa_flat = 0.0;
  std::uint64_t in_seed = 0;
  int in_nu = 0;
  auto* inf = app.add_subcommand("infer", "Estimate h*kappa at every interface node of a level-set file");
  inf->add_option("--model", in_model)->required()->check(CLI::ExistingFile);
  inf->add_option("--pca", in_pca)->required()->check(CLI::ExistingFile);
  inf->add_option("--field", in_field, "Level-set file")->required()->check(CLI::ExistingFile);
  inf->add_option("--kappa-flat", in_kappa_flat, "Override the model's switch threshold");
  inf->add_option("--out", in_out, "CSV of i,j,hk,route")->required();
  inf->add_option("--seed", in_seed, "Unused; accepted for uniformity");
  inf->add_option("--nu", in_nu, "Expected resolution level; checked against the field")->check(CLI::Range(5, 12));

  // eval-rose
  double er_a = 0.12, er_b = 0.305, er_kappa_flat = 0.0;
  int er_p = 5, er_nu = 7;
  std::string er_model, er_pca, er_out = ".";
  std::uint64_t er_seed = 0;
  auto* rose = app.add_subcommand("eval-rose", "Compare solvers on a polar rose");
  rose->add_option("--a", er_a);
  rose->add_option("--b", er_b);
  rose->add_option("--p", er_p)->check(CLI::PositiveNumber);
  rose->add_option("--nu", er_nu)->check(CLI::Range(5, 12));
  rose->add_option("--model", er_model)->check(CLI::ExistingFile);
  rose->add_option("--pca", er_pca)->check(CLI::ExistingFile);
  rose->add_option("--kappa-flat", er_kappa_flat, "Defaults to 2^(nu-7) * 5");
  rose->add_option("--out-dir", er_out);
  rose->add_option("--seed", er_seed, "Unused; accepted for uniformity");

  // eval-convergence
  double ec_a = 0.12, ec_b = 0.305;
  int ec_p = 5;
  std::vector<int> ec_nus{7, 8, 9, 10};
  std::vector<std::string> ec_models, ec_pcas;
  std::string ec_out = ".";
  bool ec_numerical_only = false;
  std::uint64_t ec_seed = 0;
  auto* conv = app.add_subcommand("eval-convergence", "Rose error tables across resolutions");
  conv->add_option("--a", ec_a);
  conv->add_option("--b", ec_b);
  conv->add_option("--p", ec_p)->check(CLI::PositiveNumber);
  conv->add_option("--nu", ec_nus, "Resolution levels")->delimiter(',');
  conv->add_option("--model", ec_models, "NU=PATH per resolution");
  conv->add_option("--pca", ec_pcas, "NU=PATH per resolution");
  conv->add_flag("--numerical-only", ec_numerical_only, "Skip the hybrid solver");
  conv->add_option("--out-dir", ec_out);
  conv->add_option("--seed", ec_seed, "Unused; accepted for uniformity");

  // eval-circle
  CircleStudyConfig cc;
  std::vector<std::string> cc_models, cc_pcas;
  std::string cc_out = ".";
  auto* circ = app.add_subcommand("eval-circle", "Relative curvature norms on small circles");
  circ->add_option("--R", cc.radius, "Circle radius")->check(CLI::PositiveNumber);
  circ->add_option("--nu", cc.nus, "Resolution levels")->delimiter(',');
  circ->add_option("--centers", cc.n_centers)->check(CLI::PositiveNumber);
  circ->add_option("--seed", cc.seed);
  circ->add_flag("--exact-sdf", cc.exact_sdf, "Use exact signed distances instead of reinitialized fields");
  circ->add_option("--model", cc_models, "NU=PATH per resolution");
  circ->add_option("--pca", cc_pcas, "NU=PATH per resolution");
  circ->add_option("--out-dir", cc_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_sine->parsed() || gen_circle->parsed()) {
      const bool sine = gen_sine->parsed();
      const GenOpts& o = sine ? gs : gc;
      const double h = std::ldexp(1.0, -o.nu);
      GenReport rep;
      const Dataset d = sine ? generate_sine_dataset(h, o.kappa_min, o.kappa_max, o.seed, o.scale, &rep)
                             : generate_circle_dataset(h, o.kappa_min, o.kappa_max, o.seed, o.scale, &rep);
      save_dataset(d, o.out);
      save_numerical(d, numerical_path(o.out));
      emit({{"command", sine ? "gen-sine" : "gen-circle"},
            {"nu", o.nu},
            {"seed", o.seed},
            {"scale", o.scale},
            {"samples", d.samples.size()},
            {"sweeps", rep.sweeps},
            {"closest_point_failures", rep.closest_point_failures},
            {"distance_fallbacks", rep.distance_fallbacks},
            {"numerical_failures", rep.numerical_failures},
            {"skipped_rls", rep.skipped_rls},
            {"out", o.out}});
    } else if (fit->parsed()) {
      json s{{"command", "fit-pca"}};
      const SplitResult parts = prepare(fp_data, s);
      const PcaParams p = fp_kind == "pca" ? fit_pca(rows_of(parts.train), parts.train.h)
                                           : fit_standardize(rows_of(parts.train), parts.train.h);
      save_pca(p, fp_out);
      s["train_rows"] = parts.train.samples.size();
      s["kind"] = fp_kind;
      s["out"] = fp_out;
      emit(s);
    } else if (trn->parsed()) {
      json s{{"command", "train"}};
      const SplitResult parts = prepare(tr_data, s);
      PcaParams pre;
      if (!tr_pca.empty()) {
        pre = load_pca(tr_pca);
      } else {
        pre = tr_kind == "pca" ? fit_pca(rows_of(parts.train), parts.train.h)
                               : fit_standardize(rows_of(parts.train), parts.train.h);
        save_pca(pre, tr_out + ".pca");
        s["pca_out"] = tr_out + ".pca";
      }
      if (pre.h != parts.train.h) throw std::runtime_error("preprocessor was fitted for a different h");
      if (!tr_test_out.empty()) {
        save_dataset(parts.test, tr_test_out);
        save_numerical(parts.test, numerical_path(tr_test_out));
      }
      MlpArchitecture arch;
      arch.hidden = parse_hidden(tr_hidden);
      arch.relu_first_hidden = tr_relu_first;
      tr_cfg.seed = tr_data.seed;
      auto [model, hist] = train(labeled(parts.train), labeled(parts.test), labeled(parts.validation), arch, pre, tr_cfg);
      model.kappa_flat = tr_kappa_flat;
      save_model(model, tr_out);
      if (!tr_history.empty()) {
        auto out = open_out(tr_history);
        write_history_csv(out, hist);
      }
      s["train"] = parts.train.samples.size();
      s["test"] = parts.test.samples.size();
      s["validation"] = parts.validation.samples.size();
      s["params"] = param_count(arch);
      s["epochs_run"] = hist.epochs_run;
      s["best_epoch"] = hist.best_epoch;
      s["best_val_mae"] = hist.best_val_mae;
      s["test_mse"] = hist.test_mse;
      s["test_mae"] = hist.test_mae;
      s["out"] = tr_out;
      emit(s);
    } else if (inf->parsed()) {
      const LevelSetField field = load_field(in_field);
      check_nu(in_nu, field.grid().h(), "field");
      const HybridSolver solver = load_solver(in_model, in_pca, in_kappa_flat, field.grid().h());
      const BatchEstimate b = solver.estimate_batch(field);
      auto out = open_out(in_out);
      out << "i,j,hk,route\n";
      for (const auto& e : b.entries)
        out << e.node.i << ',' << e.node.j << ',' << textio::format_double(e.hk) << ',' << to_string(e.route) << '\n';
      emit({{"command", "infer"},
            {"nodes", b.entries.size()},
            {"failures", b.errors.size()},
            {"neural_fraction", b.neural_fraction},
            {"out", in_out}});
    } else if (rose->parsed()) {
      const RoseInterface iface{er_a, er_b, er_p};
      const double h = std::ldexp(1.0, -er_nu);
      std::optional<HybridSolver> solver;
      if (!er_model.empty() || !er_pca.empty()) {
        if (er_model.empty() || er_pca.empty()) throw std::runtime_error("--model and --pca must be given together");
        solver.emplace(load_solver(er_model, er_pca, er_kappa_flat > 0.0 ? er_kappa_flat : kappa_flat_for(er_nu), h));
      }
      const RoseResult r = run_rose_experiment(iface, er_nu, solver ? &*solver : nullptr);
      write_stats_csv(std::cout, r);
      {
        auto out = open_out(fs::path(er_out) / "stats.csv");
        write_stats_csv(out, r);
      }
      for (const auto& name : r.solvers) {
        auto out = open_out(fs::path(er_out) / ("nodes_" + name + ".csv"));
        write_nodes_csv(out, r, name);
      }
      json s{{"command", "eval-rose"}, {"nu", er_nu}, {"nodes", r.nodes.size()}, {"dropped", r.dropped}};
      if (solver) s["neural_fraction"] = r.neural_fraction;
      for (const auto& name : r.solvers)
        s[name] = {{"mae", r.stats.at(name).mae}, {"max_ae", r.stats.at(name).max_ae}, {"mse", r.stats.at(name).mse}};
      emit(s);
    } else if (conv->parsed()) {
      const RoseInterface iface{ec_a, ec_b, ec_p};
      const auto models = parse_pairs(ec_models, "--model");
      const auto pcas = parse_pairs(ec_pcas, "--pca");
      std::vector<HybridSolver> solvers;
      solvers.reserve(ec_nus.size());
      std::map<int, const HybridSolver*> by_nu;
      if (!ec_numerical_only) {
        std::string missing;
        for (int nu : ec_nus)
          if (!models.count(nu) || !pcas.count(nu)) missing += (missing.empty() ? "" : ", ") + std::to_string(nu);
        if (!missing.empty()) throw std::runtime_error("missing model or preprocessor for nu = " + missing);
        for (int nu : ec_nus) {
          solvers.push_back(load_solver(models.at(nu), pcas.at(nu), kappa_flat_for(nu), std::ldexp(1.0, -nu)));
          by_nu[nu] = &solvers.back();
        }
      }
      const auto rows = run_convergence_study(iface, ec_nus, by_nu);
      write_convergence_csv(std::cout, rows);
      auto out = open_out(fs::path(ec_out) / "convergence.csv");
      write_convergence_csv(out, rows);
      emit({{"command", "eval-convergence"}, {"rows", rows.size()}, {"out", (fs::path(ec_out) / "convergence.csv").string()}});
    } else if (circ->parsed()) {
      const auto models = parse_pairs(cc_models, "--model");
      const auto pcas = parse_pairs(cc_pcas, "--pca");
      std::vector<HybridSolver> solvers;
      solvers.reserve(cc.nus.size());
      std::map<int, const HybridSolver*> by_nu;
      for (int nu : cc.nus) {
        if (!models.count(nu)) continue;
        if (!pcas.count(nu)) throw std::runtime_error("missing preprocessor for nu = " + std::to_string(nu));
        solvers.push_back(load_solver(models.at(nu), pcas.at(nu), kappa_flat_for(nu), std::ldexp(1.0, -nu)));
        by_nu[nu] = &solvers.back();
      }
      const auto rows = run_circle_study(cc, by_nu);
      json s{{"command", "eval-circle"}, {"seed", cc.seed}, {"centers", cc.n_centers}};
      for (const char* name : {kNumerical10, kHybrid}) {
        const bool any = std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r.solver == name; });
        if (!any) continue;
        auto out = open_out(fs::path(cc_out) / (std::string("circle_") + name + ".csv"));
        write_circle_csv(out, rows, name);
      }
      for (const auto& r : rows)
        s["results"].push_back({{"nu", r.nu},
                                {"solver", r.solver},
                                {"l2_rel", r.norms.l2},
                                {"linf_rel", r.norms.linf},
                                {"n", r.n},
                                {"neural_fraction", r.neural_fraction}});
      emit(s);
    }
  } catch (const std::exception& e) {
    std::cerr << "hcurv: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
