#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "pkf/design.hpp"
#include "pkf/knockoff.hpp"
#include "pkf/privacy.hpp"

namespace pkf {

enum class StatKind { Lcd, Csm };

struct LassoOptions {
  double tol = 1e-8;          // max absolute coefficient change per sweep
  long max_sweeps = 100000;
  bool polish = true;         // exact re-solve on the converged active set
};

enum class SourceKind { NonprivateOls, NonprivateLasso, Method1, Method2 };

// Where the 2p-vector of coefficients behind the statistics comes from.
struct EstimateSource {
  SourceKind kind = SourceKind::NonprivateOls;
  double lambda = 0.0;          // Lasso penalty (NonprivateLasso, or Method1 with allow_noisy_lasso)
  double ridge_omega2 = 0.0;    // added to the Gram before solving
  std::optional<PrivateRelease> release;
  // Lasso on a noisy, possibly indefinite Gram has no convexity guarantee.
  bool allow_noisy_lasso = false;
  // Clip the noisy Gram's spectrum at this floor before solving (Method I).
  std::optional<double> repair_min_eigenvalue;
  LassoOptions lasso;
};

struct StatisticVector {
  Vector w;
  StatKind statistic_kind;
  Vector estimate;
};

struct SelectionReport {
  std::vector<Index> selected;  // 0-based, ascending
  double threshold_t;           // +inf when nothing qualifies
  double q;
  StatisticVector w;
};

// Column swap set F: original i <-> knockoff i for every i in F.
class SwapSet {
 public:
  SwapSet(std::vector<Index> indices, Index p);
  const std::vector<Index>& indices() const noexcept { return indices_; }

 private:
  std::vector<Index> indices_;
};

// Solves (gram + omega^2 I) b = crossprod.
Vector ols_estimate(const Matrix& gram, const Vector& crossprod, double ridge_omega2 = 0.0);

// Cyclic coordinate descent for min_b b^T A b - 2 c^T b + lambda ||b||_1,
// zero start. Throws NonConvergence when the sweep cap is hit or a diagonal
// entry of A is not positive.
Vector lasso_gram(const Matrix& a, const Vector& c, double lambda, const LassoOptions& opts = {});

// Value of the objective lasso_gram minimizes.
double lasso_objective(const Matrix& a, const Vector& c, double lambda, const Vector& b);

// OLS/ridge or Lasso on an explicit (gram, crossprod) pair. kind must be
// NonprivateOls or NonprivateLasso; the private kinds go through
// estimate_from_source.
Vector estimate_coefficients(const Matrix& gram, const Vector& crossprod,
                             const EstimateSource& source);

// Full estimate for a design: nonprivate sources use G' and [X' X~']^T y;
// Method I plugs the noisy pair into the same solvers; Method II returns the
// released noisy estimate.
Vector estimate_from_source(const AugmentedDesign& ad, const Vector& y,
                            const EstimateSource& source);

// LCD: w_i = |b_i| - |b_{i+p}|.
// CSM: w_i = sgn(|b_i| - |b_{i+p}|) max(|b_i|, |b_{i+p}|), sgn(0) = 0.
StatisticVector compute_statistics(const Vector& estimate, StatKind kind);

// Knockoff+ threshold: smallest t in {|w_j|} \ {0} with
// (1 + #{w_j <= -t}) / max(#{w_j >= t}, 1) <= q.
SelectionReport knockoff_threshold(const StatisticVector& w, double q);

// Exchanges original and knockoff columns for i in F. Test helper for the
// antisymmetry property; gram_g is recomputed from the swapped columns.
AugmentedDesign swap_columns_test(const AugmentedDesign& ad, const SwapSet& f);

// P_F v and P_F A P_F for the pair permutation i <-> i + p, i in F.
Vector permute_pairs(const Vector& v, const SwapSet& f);
Matrix permute_pairs(const Matrix& a, const SwapSet& f);

struct SelectionQuality {
  double fdp;
  double power;
};

// fdp = #(selected nulls) / max(#selected, 1); power = #(selected non-nulls) / k,
// with power 0 when k = 0. Throws MissingTruth without a true support.
SelectionQuality evaluate_selection(const SelectionReport& report, const ModelOracle& truth);

}  // namespace pkf
