#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pkf/design.hpp"
#include "pkf/rng.hpp"
#include "pkf/selection.hpp"

namespace pkf {

enum class Method { None, PerturbedGram, PerturbedEstimate };

std::string_view to_string(Method m) noexcept;   // "none", "1", "2"
std::string_view to_string(StatKind k) noexcept; // "lcd", "csm"
Method parse_method(std::string_view s);
StatKind parse_stat(std::string_view s);

// How the per-trial delta is set. With TwoPOverN the total delta of a trial
// is 2p/n; with Fixed it is `value`. Either way the total is split equally:
// delta = delta_1 = delta_2 = total/3 for Method I, delta_1 = delta_2 = total/2
// for Method II.
struct DeltaRule {
  enum class Kind { Fixed, TwoPOverN } kind = Kind::TwoPOverN;
  double value = 0.0;

  double total(Index n, Index p) const;
};

struct SimConfig {
  std::vector<Index> n_grid{1000, 10000, 100000};
  Index p = 50;
  Index k = 15;
  double amplitude = 4.5;
  double sigma2 = 1.0;
  double q = 0.2;
  Index trials = 250;
  Method method = Method::PerturbedEstimate;
  StatKind stat = StatKind::Csm;
  double lambda = 0.0;  // > 0 selects the Lasso estimate (non-private or Method I)
  double ridge_omega2 = 0.0;
  bool allow_noisy_lasso = false;
  double eps = 0.2;
  double eps1 = 0.0;
  double eps2 = 0.0;
  DeltaRule delta_rule;
  // Multiplies the true ||beta|| and sigma^2 handed to calibration (>= 1).
  double pessimism = 1.0;
  Seed base_seed = 20240101;
  int threads = 1;

  double eps_total() const;
  PrivacyBudget budget_for(Index n) const;
  // Throws ConfigInvalid.
  void validate() const;
};

// Reads `key = value` lines; '#' starts a comment. Keys mirror SimConfig
// field names (n_grid is a comma list, delta_rule is `two_p_over_n` or
// `fixed`, with `delta` carrying the fixed total).
SimConfig parse_sim_config(const std::filesystem::path& path);
SimConfig parse_sim_config_text(std::string_view text);

struct SimRow {
  Index n;
  Method method;
  StatKind stat;
  Index trials;
  double fdr_hat;
  double fdr_se;
  double power_hat;
  double power_se;
  double eps_total;
  double delta_total;
  Index failures;
};

struct SimulationReport {
  std::vector<SimRow> rows;
};

struct TrialOutcome {
  double fdp = 0.0;
  double power = 0.0;
  bool failed = false;
  std::string failure;
};

// X has i.i.d. N(0, 1) entries; beta = (A, ..., A, 0, ..., 0) with k leading
// nonzeros; y = X beta + N(0, sigma^2 I).
std::pair<Dataset, ModelOracle> generate_trial(Index n, const SimConfig& cfg, Seed trial_seed);

// One full pipeline run: generate, normalize, bound, knockoffs with
// s = lambda_min, release, statistics, threshold, evaluate. Privacy
// precondition and numerical failures come back as failed outcomes.
TrialOutcome run_trial(Index n, const SimConfig& cfg, Seed trial_seed);

Seed trial_seed(Seed base, std::size_t n_index, std::size_t trial_index);

enum class Execution { Parallel, Serial };

// Runs cfg.trials trials per n. Per-trial seeds depend only on
// (base_seed, n index, trial index) and aggregation runs in trial order, so
// the report does not depend on the thread count. Throws ConfigInvalid on a
// bad config and PrivacyPreconditionFailed if more than 5% of the trials at
// some n fail.
SimulationReport run_sweep(const SimConfig& cfg, Execution exec = Execution::Parallel);

// CSV: n,method,stat,trials,fdr_hat,fdr_se,power_hat,power_se,eps_total,
// delta_total,failures; rows ascending in n; reals with 6 significant digits.
void write_report(const SimulationReport& report, const std::filesystem::path& out_path);
std::string format_report(const SimulationReport& report);

// Plot-ready CSV with a log10(n) column and +/- 2 se bands.
void write_plot_data(const SimulationReport& report, const std::filesystem::path& out_path);

}  // namespace pkf
