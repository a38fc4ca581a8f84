#include "pkf/selection.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "pkf/error.hpp"
#include "pkf/kernels.hpp"
#include "pkf/linalg.hpp"

namespace pkf {

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

// Re-solves the stationarity conditions on the active set with the signs
// found by coordinate descent. Returns nullopt if the result is not a valid
// KKT point or does not improve the objective.
std::optional<Vector> polish_active_set(const Matrix& a, const Vector& c, double lambda,
                                        const Vector& b) {
  std::vector<Index> active;
  for (Index j = 0; j < b.size(); ++j) {
    if (b(j) != 0.0) active.push_back(j);
  }
  if (active.empty()) return std::nullopt;

  const Index m = static_cast<Index>(active.size());
  Matrix a_ss(m, m);
  Vector rhs(m);
  for (Index r = 0; r < m; ++r) {
    rhs(r) = c(active[r]) - 0.5 * lambda * sgn(b(active[r]));
    for (Index s = 0; s < m; ++s) a_ss(r, s) = a(active[r], active[s]);
  }
  Vector x;
  try {
    x = solve_system(a_ss, rhs);
  } catch (const Error&) {
    return std::nullopt;
  }

  Vector out = Vector::Zero(b.size());
  for (Index r = 0; r < m; ++r) {
    if (sgn(x(r)) != sgn(b(active[r]))) return std::nullopt;
    out(active[r]) = x(r);
  }
  const Vector grad = c - a * out;
  const double slack = 0.5 * lambda * (1.0 + 1e-9) + 1e-12 * (1.0 + c.cwiseAbs().maxCoeff());
  for (Index j = 0; j < b.size(); ++j) {
    if (out(j) == 0.0 && std::abs(grad(j)) > slack) return std::nullopt;
  }
  const double f_old = lasso_objective(a, c, lambda, b);
  const double f_new = lasso_objective(a, c, lambda, out);
  if (f_new > f_old + 1e-10 * (1.0 + std::abs(f_old))) return std::nullopt;
  return out;
}

}  // namespace

SwapSet::SwapSet(std::vector<Index> indices, Index p) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw Error(ErrorKind::PreconditionViolated, "swap set has duplicate indices");
  }
  for (Index i : indices_) {
    if (i < 0 || i >= p) throw Error(ErrorKind::PreconditionViolated, "swap index out of range");
  }
}

Vector ols_estimate(const Matrix& gram, const Vector& crossprod, double ridge_omega2) {
  if (ridge_omega2 == 0.0) return solve_paired_system(gram, crossprod);
  return solve_paired_system(gram + ridge_omega2 * Matrix::Identity(gram.rows(), gram.cols()), crossprod);
}

double lasso_objective(const Matrix& a, const Vector& c, double lambda, const Vector& b) {
  return b.dot(a * b) - 2.0 * c.dot(b) + lambda * b.lpNorm<1>();
}

Vector lasso_gram(const Matrix& a, const Vector& c, double lambda, const LassoOptions& opts) {
  const Index m = c.size();
  if (a.rows() != m || a.cols() != m) {
    throw Error(ErrorKind::DimensionMismatch, "lasso: Gram and cross product sizes differ");
  }
  if (!(lambda >= 0.0)) throw Error(ErrorKind::PreconditionViolated, "lasso: lambda < 0");
  for (Index j = 0; j < m; ++j) {
    if (!(a(j, j) > 0.0)) {
      throw Error(ErrorKind::NonConvergence,
                  "lasso: non-positive Gram diagonal at " + std::to_string(j) +
                      "; coordinate subproblem is unbounded");
    }
  }

  Vector b = Vector::Zero(m);
  Vector ab = Vector::Zero(m);  // A b
  const double half_lambda = 0.5 * lambda;
  for (long sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < m; ++j) {
      const double partial = c(j) - (ab(j) - a(j, j) * b(j));
      const double next = soft_threshold(partial, half_lambda) / a(j, j);
      const double delta = next - b(j);
      if (delta != 0.0) {
        ab.noalias() += a.col(j) * delta;
        b(j) = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (!std::isfinite(max_change)) break;
    if (max_change <= opts.tol) {
      if (opts.polish) {
        if (auto polished = polish_active_set(a, c, lambda, b)) return *polished;
      }
      return b;
    }
  }
  throw Error(ErrorKind::NonConvergence, "lasso: coordinate descent hit the sweep cap of " +
                                             std::to_string(opts.max_sweeps));
}

Vector estimate_coefficients(const Matrix& gram, const Vector& crossprod,
                             const EstimateSource& source) {
  if (gram.rows() != crossprod.size() || gram.cols() != crossprod.size()) {
    throw Error(ErrorKind::DimensionMismatch, "Gram and cross product sizes differ");
  }
  const Matrix a =
      source.ridge_omega2 == 0.0
          ? gram
          : Matrix(gram + source.ridge_omega2 * Matrix::Identity(gram.rows(), gram.cols()));
  switch (source.kind) {
    case SourceKind::NonprivateOls:
      return solve_paired_system(a, crossprod);
    case SourceKind::NonprivateLasso:
      return lasso_gram(a, crossprod, source.lambda, source.lasso);
    case SourceKind::Method1:
    case SourceKind::Method2:
      break;
  }
  throw Error(ErrorKind::PreconditionViolated,
              "estimate_coefficients takes a nonprivate source; use estimate_from_source");
}

Vector estimate_from_source(const AugmentedDesign& ad, const Vector& y,
                            const EstimateSource& source) {
  switch (source.kind) {
    case SourceKind::NonprivateOls:
    case SourceKind::NonprivateLasso:
      return estimate_coefficients(ad.gram_g, kernels::cross_product(ad.augmented(), y), source);

    case SourceKind::Method1: {
      if (!source.release || source.release->kind != ReleaseKind::Method1Pair) {
        throw Error(ErrorKind::PreconditionViolated, "Method I source needs a Method I release");
      }
      Matrix gram = *source.release->gram_noisy;
      if (source.repair_min_eigenvalue) gram = clip_eigenvalues(gram, *source.repair_min_eigenvalue);
      EstimateSource inner = source;
      inner.kind = SourceKind::NonprivateOls;
      if (source.lambda > 0.0) {
        if (!source.allow_noisy_lasso) {
          throw Error(ErrorKind::PreconditionViolated,
                      "Lasso on a noisy Gram is not certified; set allow_noisy_lasso");
        }
        inner.kind = SourceKind::NonprivateLasso;
      }
      return estimate_coefficients(gram, *source.release->crossprod_noisy, inner);
    }

    case SourceKind::Method2:
      if (!source.release || source.release->kind != ReleaseKind::Method2Estimate) {
        throw Error(ErrorKind::PreconditionViolated, "Method II source needs a Method II release");
      }
      return *source.release->estimate_noisy;
  }
  throw Error(ErrorKind::PreconditionViolated, "unknown estimate source");
}

StatisticVector compute_statistics(const Vector& estimate, StatKind kind) {
  if (estimate.size() % 2 != 0) {
    throw Error(ErrorKind::DimensionMismatch, "estimate length must be 2p");
  }
  const Index p = estimate.size() / 2;
  Vector w(p);
  for (Index i = 0; i < p; ++i) {
    const double orig = std::abs(estimate(i));
    const double ko = std::abs(estimate(i + p));
    w(i) = kind == StatKind::Lcd ? orig - ko : sgn(orig - ko) * std::max(orig, ko);
  }
  return StatisticVector{std::move(w), kind, estimate};
}

SelectionReport knockoff_threshold(const StatisticVector& stats, double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorKind::PreconditionViolated, "q must lie in (0, 1)");
  const Vector& w = stats.w;

  std::set<double> candidates;
  for (Index j = 0; j < w.size(); ++j) {
    if (w(j) != 0.0) candidates.insert(std::abs(w(j)));
  }

  double threshold = std::numeric_limits<double>::infinity();
  for (double t : candidates) {
    Index neg = 0, pos = 0;
    for (Index j = 0; j < w.size(); ++j) {
      neg += w(j) <= -t;
      pos += w(j) >= t;
    }
    const double ratio = (1.0 + static_cast<double>(neg)) / static_cast<double>(std::max<Index>(pos, 1));
    if (ratio <= q) {
      threshold = t;
      break;
    }
  }

  std::vector<Index> selected;
  if (std::isfinite(threshold)) {
    for (Index j = 0; j < w.size(); ++j) {
      if (w(j) >= threshold) selected.push_back(j);
    }
  }
  return SelectionReport{std::move(selected), threshold, q, stats};
}

AugmentedDesign swap_columns_test(const AugmentedDesign& ad, const SwapSet& f) {
  AugmentedDesign out = ad;
  for (Index i : f.indices()) {
    out.design.x_prime.col(i).swap(out.knockoff.col(i));
  }
  out.gram_g = kernels::gram(out.augmented());
  return out;
}

Vector permute_pairs(const Vector& v, const SwapSet& f) {
  const Index p = v.size() / 2;
  Vector out = v;
  for (Index i : f.indices()) std::swap(out(i), out(i + p));
  return out;
}

Matrix permute_pairs(const Matrix& a, const SwapSet& f) {
  const Index p = a.rows() / 2;
  Matrix out = a;
  for (Index i : f.indices()) {
    out.row(i).swap(out.row(i + p));
  }
  for (Index i : f.indices()) {
    out.col(i).swap(out.col(i + p));
  }
  return out;
}

SelectionQuality evaluate_selection(const SelectionReport& report, const ModelOracle& truth) {
  if (!truth.true_support) throw Error(ErrorKind::MissingTruth, "no true support available");
  const std::set<Index> support(truth.true_support->begin(), truth.true_support->end());
  Index false_hits = 0, true_hits = 0;
  for (Index j : report.selected) {
    if (support.count(j)) ++true_hits;
    else ++false_hits;
  }
  const double denom = static_cast<double>(std::max<std::size_t>(report.selected.size(), 1));
  const double k = static_cast<double>(support.size());
  return SelectionQuality{static_cast<double>(false_hits) / denom,
                          k > 0 ? static_cast<double>(true_hits) / k : 0.0};
}

}  // namespace pkf
