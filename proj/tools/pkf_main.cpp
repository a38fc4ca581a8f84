// pkf: command-line front end for the private knockoff filter.
//
//   pkf calibrate --x X.csv --y y.csv [...]   spectral and sensitivity summary as JSON
//   pkf run       --x X.csv --y y.csv [...]   one selection, JSON SelectionReport
//   pkf simulate  --config sim.cfg --out results.csv [--seed N] [--threads K]

#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pkf/design.hpp"
#include "pkf/error.hpp"
#include "pkf/knockoff.hpp"
#include "pkf/privacy.hpp"
#include "pkf/selection.hpp"
#include "pkf/simulation.hpp"

namespace {

using nlohmann::json;

struct DataArgs {
  std::string x_path;
  std::string y_path;
  bool header = false;
  std::optional<double> row_bound;
  double beta_norm_bound = 0.0;
  double sigma2_bound = 1.0;
  pkf::PrivacyBudget budget;
  double ridge = 0.0;
  std::string method = "none";
};

void add_data_options(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("--x", a.x_path, "design matrix CSV (rows = samples)")->required();
  cmd->add_option("--y", a.y_path, "response file, one value per line")->required();
  cmd->add_flag("--header", a.header, "skip the first line of both files");
  cmd->add_option("--row-bound", a.row_bound, "override the row-norm bound B (raw design)");
  cmd->add_option("--beta-norm-bound", a.beta_norm_bound, "bound on ||beta||_2");
  cmd->add_option("--sigma2-bound", a.sigma2_bound, "bound on the noise variance");
  cmd->add_option("--eps", a.budget.eps, "eps of the Gaussian release");
  cmd->add_option("--eps1", a.budget.eps_1, "eps of theta1 (Method I)");
  cmd->add_option("--eps2", a.budget.eps_2, "eps of theta2 (Method I)");
  cmd->add_option("--delta", a.budget.delta, "delta of theta2 (Method I)");
  cmd->add_option("--delta1", a.budget.delta_1, "delta of the Gaussian release");
  cmd->add_option("--delta2", a.budget.delta_2, "delta of the noise-norm concentration event");
  cmd->add_option("--ridge", a.ridge, "ridge omega^2 added to G'");
  cmd->add_option("--method", a.method, "none, 1 or 2")->check(CLI::IsMember({"none", "1", "2"}));
}

json nullable(const std::function<double()>& f) {
  try {
    return f();
  } catch (const pkf::Error&) {
    return nullptr;
  }
}

int cmd_calibrate(const DataArgs& a) {
  const pkf::Dataset data = pkf::load_dataset(a.x_path, a.y_path, a.header);
  const pkf::NormalizedDesign nd = pkf::normalize_columns(data);
  const pkf::GramSpectrum spectrum = pkf::compute_spectrum(nd);
  const double s = pkf::choose_s(spectrum, pkf::SChoice::PrivateRecommended);
  const auto lemma = pkf::lemma_eigenvalues(spectrum, s);
  const pkf::NormBounds bounds = pkf::compute_bounds(data, a.row_bound);

  pkf::ModelOracle oracle;
  oracle.beta_norm_bound = a.beta_norm_bound;
  oracle.sigma2_bound = a.sigma2_bound;
  const auto ctx = pkf::build_sensitivity_context(
      bounds, oracle, spectrum, pkf::raw_gram_frobenius(nd, spectrum), a.budget, data.p());
  const auto gs = pkf::gram_sensitivities(ctx);
  const double m1 = pkf::method1_crossprod_sensitivity(ctx);
  const json m2 = nullable([&] { return pkf::method2_estimate_sensitivity(ctx, a.ridge); });

  json out;
  out["n"] = data.n();
  out["p"] = data.p();
  out["lambda_min"] = spectrum.lambda_min;
  out["lambda_max"] = spectrum.lambda_max;
  out["s"] = s;
  out["lemma_lambda_max_g"] = lemma.lambda_max_g;
  out["lemma_lambda_min_g"] = lemma.lambda_min_g;
  out["row_bound_b"] = bounds.row_bound_b;
  out["col_min_c"] = bounds.col_min_c;
  out["eta2"] = ctx.eta2;
  out["zeta"] = ctx.zeta;
  out["gamma"] = ctx.gamma;
  out["lambda_min_sens"] = gs.lambda_min_sens;
  out["gram_frob_sens"] = gs.gram_frob_sens;
  out["delta2_floor"] = pkf::delta2_floor(data.p());
  out["method1_sensitivity"] = m1;
  out["method2_sensitivity"] = m2;
  out["theta1_scale"] = nullable([&] { return pkf::laplace_scale(gs.lambda_min_sens, a.budget.eps_1); });
  out["kappa1_sq"] =
      nullable([&] { return pkf::gaussian_scale(gs.gram_frob_sens, a.budget.eps_2, a.budget.delta); });
  if (a.method == "2") {
    out["kappa2_sq_or_kappa_sq"] = m2.is_null() ? json(nullptr) : nullable([&] {
      return pkf::gaussian_scale(m2.get<double>(), a.budget.eps, a.budget.delta_1);
    });
    const auto [e, d] = pkf::total_privacy(a.budget, pkf::ReleaseKind::Method2Estimate);
    out["total_eps"] = e;
    out["total_delta"] = d;
  } else {
    out["kappa2_sq_or_kappa_sq"] =
        nullable([&] { return pkf::gaussian_scale(m1, a.budget.eps, a.budget.delta_1); });
    const auto [e, d] = pkf::total_privacy(a.budget, pkf::ReleaseKind::Method1Pair);
    out["total_eps"] = e;
    out["total_delta"] = d;
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

struct RunArgs {
  std::string stat = "csm";
  double q = 0.2;
  double lambda = 0.0;
  bool noisy_lasso = false;
  std::optional<double> repair_floor;
  std::uint64_t seed = 1;
};

int cmd_run(const DataArgs& a, const RunArgs& r) {
  const pkf::Dataset data = pkf::load_dataset(a.x_path, a.y_path, a.header);
  const pkf::NormalizedDesign nd = pkf::normalize_columns(data);
  const pkf::GramSpectrum spectrum = pkf::compute_spectrum(nd);
  const pkf::AugmentedDesign ad = pkf::build_knockoffs(nd, spectrum, spectrum.lambda_min);

  pkf::EstimateSource src;
  src.lambda = r.lambda;
  src.ridge_omega2 = a.ridge;
  src.allow_noisy_lasso = r.noisy_lasso;
  src.repair_min_eigenvalue = r.repair_floor;

  json scales = nullptr;
  json privacy = nullptr;
  if (a.method == "none") {
    src.kind = r.lambda > 0.0 ? pkf::SourceKind::NonprivateLasso : pkf::SourceKind::NonprivateOls;
  } else {
    pkf::ModelOracle oracle;
    oracle.beta_norm_bound = a.beta_norm_bound;
    oracle.sigma2_bound = a.sigma2_bound;
    const pkf::NormBounds bounds = pkf::compute_bounds(data, a.row_bound);
    const auto ctx = pkf::build_sensitivity_context(
        bounds, oracle, spectrum, pkf::raw_gram_frobenius(nd, spectrum), a.budget, data.p());
    if (a.method == "1") {
      src.kind = pkf::SourceKind::Method1;
      src.release = pkf::release_method1(ad, data.y(), ctx, a.budget, r.seed);
    } else {
      src.kind = pkf::SourceKind::Method2;
      src.release = pkf::release_method2(ad, data.y(), ctx, a.budget, a.ridge, r.seed);
    }
    const auto& ns = src.release->noise_scales;
    scales = {{"theta1_scale", ns.theta1_scale}, {"kappa1_sq", ns.kappa1_sq},
              {"kappa2_sq", ns.kappa2_sq},       {"kappa_sq", ns.kappa_sq},
              {"sensitivity", ns.sensitivity}};
    const auto [e, d] = src.release->total_privacy();
    privacy = {{"eps", e}, {"delta", d}};
  }

  const pkf::Vector estimate = pkf::estimate_from_source(ad, data.y(), src);
  const auto stats = pkf::compute_statistics(estimate, pkf::parse_stat(r.stat));
  const auto report = pkf::knockoff_threshold(stats, r.q);

  json selected = json::array();
  for (auto j : report.selected) selected.push_back(j + 1);
  json out;
  out["selected"] = selected;
  out["threshold"] = std::isfinite(report.threshold_t) ? json(report.threshold_t) : json(nullptr);
  out["q"] = r.q;
  out["statistic"] = r.stat;
  out["statistics"] = std::vector<double>(stats.w.data(), stats.w.data() + stats.w.size());
  out["noise_scales"] = scales;
  out["total_privacy"] = privacy;
  std::cout << out.dump(2) << '\n';
  return 0;
}

struct SimArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string plot_data;
};

int cmd_simulate(const SimArgs& a) {
  pkf::SimConfig cfg = pkf::parse_sim_config(a.config);
  if (a.seed) cfg.base_seed = *a.seed;
  if (a.threads) cfg.threads = *a.threads;
  const auto report = pkf::run_sweep(cfg);
  pkf::write_report(report, a.out);
  if (!a.plot_data.empty()) pkf::write_plot_data(report, a.plot_data);
  std::cout << pkf::format_report(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private fixed-X knockoff filter"};
  app.require_subcommand(1);

  DataArgs cal_args;
  auto* calibrate = app.add_subcommand("calibrate", "print spectral and sensitivity calibration as JSON");
  add_data_options(calibrate, cal_args);

  DataArgs run_data;
  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run the knockoff filter and print the selection as JSON");
  add_data_options(run, run_data);
  run->add_option("--stat", run_args.stat, "lcd or csm")->check(CLI::IsMember({"lcd", "csm"}));
  run->add_option("--q", run_args.q, "target FDR");
  run->add_option("--lambda", run_args.lambda, "Lasso penalty (0 = OLS)");
  run->add_flag("--noisy-lasso", run_args.noisy_lasso, "allow Lasso on the Method I noisy Gram");
  run->add_option("--repair-psd", run_args.repair_floor, "clip the noisy Gram spectrum at this floor");
  run->add_option("--seed", run_args.seed, "noise seed");

  SimArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo FDR/power sweep");
  simulate->add_option("--config", sim_args.config, "key = value config file")->required();
  simulate->add_option("--out", sim_args.out, "output CSV")->required();
  simulate->add_option("--seed", sim_args.seed, "base seed (overrides config)");
  simulate->add_option("--threads", sim_args.threads, "worker threads (overrides config)");
  simulate->add_option("--emit-plot-data", sim_args.plot_data, "also write plot-ready CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*calibrate) return cmd_calibrate(cal_args);
    if (*run) return cmd_run(run_data, run_args);
    if (*simulate) return cmd_simulate(sim_args);
  } catch (const pkf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
