#include "pkf/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <omp.h>

#include "pkf/error.hpp"
#include "pkf/knockoff.hpp"
#include "pkf/privacy.hpp"

namespace pkf {

namespace {

constexpr double kMaxFailureRate = 0.05;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view key, std::string_view v) {
  try {
    std::size_t pos = 0;
    const std::string str(v);
    const double d = std::stod(str, &pos);
    if (pos != str.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ConfigInvalid,
                "key '" + std::string(key) + "': not a number: '" + std::string(v) + "'");
  }
}

long long to_integer(std::string_view key, std::string_view v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) {
    throw Error(ErrorKind::ConfigInvalid, "key '" + std::string(key) + "': expected an integer");
  }
  return static_cast<long long>(d);
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

// Mean and standard error, summed in index order.
Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return m;
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  m.se = sd / std::sqrt(static_cast<double>(xs.size()));
  return m;
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::None: return "none";
    case Method::PerturbedGram: return "1";
    case Method::PerturbedEstimate: return "2";
  }
  return "?";
}

std::string_view to_string(StatKind k) noexcept { return k == StatKind::Lcd ? "lcd" : "csm"; }

Method parse_method(std::string_view s) {
  s = trim(s);
  if (s == "none" || s == "0") return Method::None;
  if (s == "1") return Method::PerturbedGram;
  if (s == "2") return Method::PerturbedEstimate;
  throw Error(ErrorKind::ConfigInvalid, "method must be none, 1 or 2, got '" + std::string(s) + "'");
}

StatKind parse_stat(std::string_view s) {
  s = trim(s);
  if (s == "lcd") return StatKind::Lcd;
  if (s == "csm") return StatKind::Csm;
  throw Error(ErrorKind::ConfigInvalid, "stat must be lcd or csm, got '" + std::string(s) + "'");
}

double DeltaRule::total(Index n, Index p) const {
  return kind == Kind::TwoPOverN ? 2.0 * static_cast<double>(p) / static_cast<double>(n) : value;
}

double SimConfig::eps_total() const {
  switch (method) {
    case Method::None: return 0.0;
    case Method::PerturbedGram: return eps + eps1 + eps2;
    case Method::PerturbedEstimate: return eps;
  }
  return 0.0;
}

PrivacyBudget SimConfig::budget_for(Index n) const {
  const double total = delta_rule.total(n, p);
  PrivacyBudget b;
  b.eps = eps;
  b.eps_1 = eps1;
  b.eps_2 = eps2;
  if (method == Method::PerturbedGram) {
    b.delta = b.delta_1 = b.delta_2 = total / 3.0;
  } else {
    b.delta = 0.0;
    b.delta_1 = b.delta_2 = total / 2.0;
  }
  return b;
}

void SimConfig::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorKind::ConfigInvalid, msg); };
  if (n_grid.empty()) bad("n_grid is empty");
  if (p < 1) bad("p must be >= 1");
  if (k < 0 || k > p) bad("need 0 <= k <= p");
  if (!(q > 0.0 && q < 1.0)) bad("q must lie in (0, 1)");
  if (trials < 1) bad("trials must be >= 1");
  if (!(sigma2 > 0.0)) bad("sigma2 must be positive");
  if (!(lambda >= 0.0)) bad("lambda must be non-negative");
  if (!(ridge_omega2 >= 0.0)) bad("ridge must be non-negative");
  if (!(pessimism >= 1.0)) bad("pessimism must be >= 1");
  if (threads < 1) bad("threads must be >= 1");
  for (Index n : n_grid) {
    if (n < 2 * p) bad("every n must satisfy n >= 2p; got n=" + std::to_string(n));
  }
  if (delta_rule.kind == DeltaRule::Kind::Fixed && !(delta_rule.value > 0.0 && delta_rule.value < 1.0)) {
    bad("fixed delta must lie in (0, 1)");
  }
  if (method == Method::PerturbedGram && lambda > 0.0 && !allow_noisy_lasso) {
    bad("Lasso under Method I needs noisy_lasso = true");
  }
  if (method != Method::None) {
    try {
      for (Index n : n_grid) {
        validate_budget(budget_for(n), method == Method::PerturbedGram ? ReleaseKind::Method1Pair
                                                                        : ReleaseKind::Method2Estimate);
      }
    } catch (const Error& e) {
      bad(e.what());
    }
  }
}

SimConfig parse_sim_config_text(std::string_view text) {
  SimConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv(line);
    if (auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
    sv = trim(sv);
    if (sv.empty()) continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::ConfigInvalid, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string_view key = trim(sv.substr(0, eq));
    const std::string_view val = trim(sv.substr(eq + 1));

    if (key == "n_grid") {
      cfg.n_grid.clear();
      std::string_view rest = val;
      for (;;) {
        const auto comma = rest.find(',');
        cfg.n_grid.push_back(static_cast<Index>(to_integer(key, trim(rest.substr(0, comma)))));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
    } else if (key == "p") {
      cfg.p = static_cast<Index>(to_integer(key, val));
    } else if (key == "k") {
      cfg.k = static_cast<Index>(to_integer(key, val));
    } else if (key == "amplitude") {
      cfg.amplitude = to_double(key, val);
    } else if (key == "sigma2") {
      cfg.sigma2 = to_double(key, val);
    } else if (key == "q") {
      cfg.q = to_double(key, val);
    } else if (key == "trials") {
      cfg.trials = static_cast<Index>(to_integer(key, val));
    } else if (key == "method") {
      cfg.method = parse_method(val);
    } else if (key == "stat") {
      cfg.stat = parse_stat(val);
    } else if (key == "lambda") {
      cfg.lambda = to_double(key, val);
    } else if (key == "ridge") {
      cfg.ridge_omega2 = to_double(key, val);
    } else if (key == "noisy_lasso") {
      cfg.allow_noisy_lasso = val == "true" || val == "1";
    } else if (key == "eps") {
      cfg.eps = to_double(key, val);
    } else if (key == "eps1") {
      cfg.eps1 = to_double(key, val);
    } else if (key == "eps2") {
      cfg.eps2 = to_double(key, val);
    } else if (key == "delta_rule") {
      if (val == "two_p_over_n") cfg.delta_rule.kind = DeltaRule::Kind::TwoPOverN;
      else if (val == "fixed") cfg.delta_rule.kind = DeltaRule::Kind::Fixed;
      else throw Error(ErrorKind::ConfigInvalid, "delta_rule must be two_p_over_n or fixed");
    } else if (key == "delta") {
      cfg.delta_rule.value = to_double(key, val);
    } else if (key == "pessimism") {
      cfg.pessimism = to_double(key, val);
    } else if (key == "base_seed") {
      cfg.base_seed = static_cast<Seed>(to_integer(key, val));
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(to_integer(key, val));
    } else {
      throw Error(ErrorKind::ConfigInvalid, "unknown key '" + std::string(key) + "'");
    }
  }
  cfg.validate();
  return cfg;
}

SimConfig parse_sim_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sim_config_text(ss.str());
}

std::pair<Dataset, ModelOracle> generate_trial(Index n, const SimConfig& cfg, Seed seed) {
  Engine design_eng = make_engine(derive_seed(seed, {stream::kDesign}));
  Engine noise_eng = make_engine(derive_seed(seed, {stream::kResponse}));
  std::normal_distribution<double> std_normal(0.0, 1.0);

  Matrix x(n, cfg.p);
  for (Index j = 0; j < cfg.p; ++j) {
    for (Index i = 0; i < n; ++i) x(i, j) = std_normal(design_eng);
  }
  Vector beta = Vector::Zero(cfg.p);
  beta.head(cfg.k).setConstant(cfg.amplitude);

  const double sigma = std::sqrt(cfg.sigma2);
  Vector y = x * beta;
  for (Index i = 0; i < n; ++i) y(i) += sigma * std_normal(noise_eng);

  ModelOracle oracle = ModelOracle::from_truth(beta, cfg.sigma2);
  oracle.beta_norm_bound = cfg.amplitude * std::sqrt(static_cast<double>(cfg.k));
  return {Dataset(std::move(x), std::move(y)), std::move(oracle)};
}

TrialOutcome run_trial(Index n, const SimConfig& cfg, Seed seed) {
  auto [data, truth] = generate_trial(n, cfg, seed);
  TrialOutcome out;
  try {
    const NormalizedDesign nd = normalize_columns(data);
    const GramSpectrum spectrum = compute_spectrum(nd);
    const AugmentedDesign ad = build_knockoffs(nd, spectrum, spectrum.lambda_min);

    EstimateSource src;
    src.ridge_omega2 = cfg.ridge_omega2;
    src.lambda = cfg.lambda;
    src.allow_noisy_lasso = cfg.allow_noisy_lasso;

    if (cfg.method == Method::None) {
      src.kind = cfg.lambda > 0.0 ? SourceKind::NonprivateLasso : SourceKind::NonprivateOls;
    } else {
      ModelOracle calib = truth;
      calib.beta_norm_bound *= cfg.pessimism;
      calib.sigma2_bound *= cfg.pessimism;
      const PrivacyBudget budget = cfg.budget_for(n);
      const NormBounds bounds = compute_bounds(data);
      const SensitivityContext ctx = build_sensitivity_context(
          bounds, calib, spectrum, raw_gram_frobenius(nd, spectrum), budget, cfg.p);
      const Seed release_seed = derive_seed(seed, {stream::kRelease});
      if (cfg.method == Method::PerturbedGram) {
        src.kind = SourceKind::Method1;
        src.release = release_method1(ad, data.y(), ctx, budget, release_seed);
      } else {
        src.kind = SourceKind::Method2;
        src.release = release_method2(ad, data.y(), ctx, budget, cfg.ridge_omega2, release_seed);
      }
    }

    const Vector estimate = estimate_from_source(ad, data.y(), src);
    const SelectionReport report = knockoff_threshold(compute_statistics(estimate, cfg.stat), cfg.q);
    const SelectionQuality quality = evaluate_selection(report, truth);
    out.fdp = quality.fdp;
    out.power = quality.power;
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::PrivacyPreconditionFailed:
      case ErrorKind::BoundViolation:
      case ErrorKind::SingularSystem:
      case ErrorKind::NonConvergence:
        out.failed = true;
        out.failure = e.what();
        break;
      default:
        throw;
    }
  }
  return out;
}

Seed trial_seed(Seed base, std::size_t n_index, std::size_t trial_index) {
  return derive_seed(base, {static_cast<std::uint64_t>(n_index), static_cast<std::uint64_t>(trial_index)});
}

SimulationReport run_sweep(const SimConfig& cfg, Execution exec) {
  cfg.validate();

  std::vector<std::size_t> order(cfg.n_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cfg.n_grid[a] < cfg.n_grid[b]; });

  SimulationReport report;
  for (std::size_t n_index : order) {
    const Index n = cfg.n_grid[n_index];
    const auto trials = static_cast<std::ptrdiff_t>(cfg.trials);
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials));

    // Exceptions may not escape an OpenMP region; park the first one.
    std::exception_ptr error;
    const int threads = exec == Execution::Serial ? 1 : cfg.threads;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t t = 0; t < trials; ++t) {
      try {
        outcomes[static_cast<std::size_t>(t)] =
            run_trial(n, cfg, trial_seed(cfg.base_seed, n_index, static_cast<std::size_t>(t)));
      } catch (...) {
#pragma omp critical(pkf_sweep_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);

    std::vector<double> fdp, power;
    Index failures = 0;
    std::string first_failure;
    for (const auto& o : outcomes) {
      if (o.failed) {
        if (failures == 0) first_failure = o.failure;
        ++failures;
        continue;
      }
      fdp.push_back(o.fdp);
      power.push_back(o.power);
    }
    if (static_cast<double>(failures) > kMaxFailureRate * static_cast<double>(cfg.trials)) {
      std::ostringstream os;
      os << failures << " of " << cfg.trials << " trials failed at n=" << n
         << " (limit 5%); first failure: " << first_failure;
      throw Error(ErrorKind::PrivacyPreconditionFailed, os.str());
    }
    if (fdp.size() < 2) {
      std::cerr << "warning: n=" << n << " has " << fdp.size()
                << " successful trial(s); standard errors reported as 0\n";
    }

    const Moments f = moments(fdp);
    const Moments pw = moments(power);
    const PrivacyBudget budget = cfg.budget_for(n);
    double delta_total = 0.0;
    if (cfg.method == Method::PerturbedGram) {
      delta_total = total_privacy(budget, ReleaseKind::Method1Pair).second;
    } else if (cfg.method == Method::PerturbedEstimate) {
      delta_total = total_privacy(budget, ReleaseKind::Method2Estimate).second;
    }
    report.rows.push_back(SimRow{n, cfg.method, cfg.stat, cfg.trials, f.mean, f.se, pw.mean, pw.se,
                                 cfg.eps_total(), delta_total, failures});
  }
  return report;
}

std::string format_report(const SimulationReport& report) {
  std::vector<SimRow> rows = report.rows;
  std::stable_sort(rows.begin(), rows.end(), [](const SimRow& a, const SimRow& b) { return a.n < b.n; });
  std::ostringstream os;
  os << "n,method,stat,trials,fdr_hat,fdr_se,power_hat,power_se,eps_total,delta_total,failures\n";
  for (const auto& r : rows) {
    os << r.n << ',' << to_string(r.method) << ',' << to_string(r.stat) << ',' << r.trials << ','
       << fmt6(r.fdr_hat) << ',' << fmt6(r.fdr_se) << ',' << fmt6(r.power_hat) << ','
       << fmt6(r.power_se) << ',' << fmt6(r.eps_total) << ',' << fmt6(r.delta_total) << ','
       << r.failures << '\n';
  }
  return os.str();
}

void write_report(const SimulationReport& report, const std::filesystem::path& out_path) {
  std::ofstream out(out_path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + out_path.string());
  out << format_report(report);
  if (!out) throw Error(ErrorKind::IoError, "write failed: " + out_path.string());
}

void write_plot_data(const SimulationReport& report, const std::filesystem::path& out_path) {
  std::ofstream out(out_path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + out_path.string());
  std::vector<SimRow> rows = report.rows;
  std::stable_sort(rows.begin(), rows.end(), [](const SimRow& a, const SimRow& b) { return a.n < b.n; });
  out << "n,log10_n,method,stat,fdr_hat,fdr_lo,fdr_hi,power_hat,power_lo,power_hi\n";
  for (const auto& r : rows) {
    out << r.n << ',' << fmt6(std::log10(static_cast<double>(r.n))) << ',' << to_string(r.method)
        << ',' << to_string(r.stat) << ',' << fmt6(r.fdr_hat) << ','
        << fmt6(std::max(0.0, r.fdr_hat - 2 * r.fdr_se)) << ','
        << fmt6(std::min(1.0, r.fdr_hat + 2 * r.fdr_se)) << ',' << fmt6(r.power_hat) << ','
        << fmt6(std::max(0.0, r.power_hat - 2 * r.power_se)) << ','
        << fmt6(std::min(1.0, r.power_hat + 2 * r.power_se)) << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed: " + out_path.string());
}

}  // namespace pkf
