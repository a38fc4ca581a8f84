#include "pkf/privacy.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "pkf/error.hpp"
#include "pkf/kernels.hpp"
#include "pkf/linalg.hpp"

namespace pkf {

namespace {

constexpr double kStrictBump = 1.0 + 1e-9;
constexpr double kIdentityTolerance = 1e-12;

void require_open_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    std::ostringstream os;
    os << name << " must lie in (0, 1), got " << v;
    throw Error(ErrorKind::BudgetInvalid, os.str());
  }
}

}  // namespace

std::pair<double, double> total_privacy(const PrivacyBudget& b, ReleaseKind kind) {
  switch (kind) {
    case ReleaseKind::Method1Pair:
      return {b.eps + b.eps_1 + b.eps_2, b.delta + b.delta_1 + b.delta_2};
    case ReleaseKind::Method2Estimate:
      return {b.eps, b.delta_1 + b.delta_2};
  }
  return {0.0, 0.0};
}

void validate_budget(const PrivacyBudget& b, ReleaseKind kind) {
  require_open_unit(b.eps, "eps");
  require_open_unit(b.delta_1, "delta_1");
  require_open_unit(b.delta_2, "delta_2");
  if (kind == ReleaseKind::Method1Pair) {
    if (!(b.eps_1 > 0.0)) throw Error(ErrorKind::BudgetInvalid, "eps_1 must be positive");
    require_open_unit(b.eps_2, "eps_2");
    require_open_unit(b.delta, "delta");
  }
}

double delta2_floor(Index p) { return 2.0 * std::exp(-0.5 * static_cast<double>(p)); }

double SensitivityContext::eta() const { return std::sqrt(eta2); }

double SensitivityContext::b_over_eta() const { return bounds.row_bound_b / eta(); }

double raw_gram_frobenius(const NormalizedDesign& nd, const GramSpectrum& spectrum) {
  const Vector col_norms = nd.normalizer_d.cwiseInverse();
  return (col_norms.asDiagonal() * spectrum.sigma_prime * col_norms.asDiagonal()).norm();
}

SensitivityContext build_sensitivity_context(const NormBounds& bounds, const ModelOracle& oracle,
                                             const GramSpectrum& spectrum,
                                             double raw_gram_frobenius,
                                             const PrivacyBudget& budget, Index p) {
  const double b = bounds.row_bound_b;
  const double c = bounds.col_min_c;
  if (!(b > 0.0) || !(b < c)) {
    std::ostringstream os;
    os << "need 0 < B < C_min, got B=" << b << ", C_min=" << c;
    throw Error(ErrorKind::BoundViolation, os.str());
  }
  if (!(budget.delta_2 > 0.0 && budget.delta_2 < 1.0)) {
    throw Error(ErrorKind::BudgetInvalid, "delta_2 must lie in (0, 1)");
  }
  const double floor = delta2_floor(p);
  const double pd = static_cast<double>(p);
  const double denom = 1.0 - std::sqrt((2.0 / pd) * std::log(2.0 / budget.delta_2));
  if (!(budget.delta_2 > floor) || !(denom > 0.0)) {
    std::ostringstream os;
    os << "delta_2=" << budget.delta_2 << " must exceed 2 exp(-p/2)=" << floor << " for p=" << p;
    throw Error(ErrorKind::DeltaTooSmall, os.str());
  }
  if (!(oracle.sigma2_bound > 0.0) || !(oracle.beta_norm_bound >= 0.0)) {
    throw Error(ErrorKind::PreconditionViolated, "need sigma^2 bound > 0 and ||beta|| bound >= 0");
  }

  SensitivityContext ctx{b * b / (c * c - b * b),
                         2.0 * pd * oracle.sigma2_bound / denom,
                         2.0 * spectrum.lambda_max - spectrum.lambda_min,
                         bounds,
                         oracle,
                         spectrum,
                         raw_gram_frobenius,
                         p};

  const double expect = std::sqrt(c * c - b * b);
  if (std::abs(ctx.b_over_eta() - expect) > kIdentityTolerance * expect) {
    throw Error(ErrorKind::PreconditionViolated, "B/eta != sqrt(C_min^2 - B^2)");
  }
  return ctx;
}

GramSensitivities gram_sensitivities(const SensitivityContext& ctx) {
  return {ctx.eta2 * (1.0 + ctx.spectrum.lambda_min),
          ctx.eta2 * (std::numbers::sqrt2 + ctx.spectrum.frobenius_norm)};
}

double method1_crossprod_sensitivity(const SensitivityContext& ctx) {
  const double eta = ctx.eta();
  const double b = ctx.bounds.row_bound_b;
  const double c = ctx.bounds.col_min_c;
  const double lmin = ctx.spectrum.lambda_min;
  const double lmax = ctx.spectrum.lambda_max;

  // Noise part: two concentration terms around the mean response.
  const double noise_term =
      std::sqrt(ctx.zeta) * (2.0 * std::sqrt(ctx.gamma) + eta * std::sqrt(3.0 + 2.0 * lmax + lmin));

  // Signal part: how much the normalized design moves under one row swap.
  const double signal_coef = std::numbers::sqrt2 * (eta / b - 1.0 / c) * ctx.frobenius_sigma_raw +
                             2.0 * eta * b + (c - ctx.b_over_eta()) * lmin +
                             ctx.eta2 * (lmin + 1.0) * std::sqrt(c * c + b * b);

  return noise_term + ctx.oracle.beta_norm_bound * signal_coef;
}

double method2_estimate_sensitivity(const SensitivityContext& ctx, double ridge_omega2) {
  if (!(ridge_omega2 >= 0.0)) {
    throw Error(ErrorKind::PreconditionViolated, "ridge omega^2 must be non-negative");
  }
  if (!(ctx.eta2 < 1.0)) {
    std::ostringstream os;
    os << "OLS release needs eta^2 < 1, have eta^2 = " << ctx.eta2
       << "; no ridge can compensate, tighten the row bound";
    throw Error(ErrorKind::PrivacyPreconditionFailed, os.str());
  }
  const double lmin = ctx.spectrum.lambda_min + ridge_omega2;
  const double need = ctx.eta2 / (1.0 - ctx.eta2);
  const double denom = (1.0 - ctx.eta2) * lmin - ctx.eta2;
  if (!(lmin > need) || !(denom > 0.0)) {
    std::ostringstream os;
    os << "OLS release needs lambda_min(Sigma') + omega^2 > eta^2/(1-eta^2); have " << lmin
       << " vs " << need << ". Add ridge stabilization (omega^2 >= " << (need - lmin)
       << ") or tighten the row bound";
    throw Error(ErrorKind::PrivacyPreconditionFailed, os.str());
  }
  return 2.0 * std::sqrt(ctx.zeta) / std::sqrt(denom) +
         (ctx.bounds.col_min_c - ctx.b_over_eta()) * ctx.oracle.beta_norm_bound;
}

double gaussian_scale(double sensitivity_l2, double eps, double delta) {
  require_open_unit(eps, "eps");
  require_open_unit(delta, "delta");
  if (!(sensitivity_l2 >= 0.0)) {
    throw Error(ErrorKind::BudgetInvalid, "sensitivity must be non-negative");
  }
  const double ratio = sensitivity_l2 / eps;
  return 2.0 * std::log(1.25 / delta) * ratio * ratio * kStrictBump;
}

double laplace_scale(double sensitivity_l1, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::BudgetInvalid, "eps must be positive");
  if (!(sensitivity_l1 >= 0.0)) {
    throw Error(ErrorKind::BudgetInvalid, "sensitivity must be non-negative");
  }
  return sensitivity_l1 / eps;
}

Vector sample_gaussian_vector(Index dim, double variance, Seed seed) {
  Vector out = Vector::Zero(dim);
  if (variance <= 0.0) return out;
  Engine eng = make_engine(seed);
  std::normal_distribution<double> dist(0.0, std::sqrt(variance));
  for (Index i = 0; i < dim; ++i) out(i) = dist(eng);
  return out;
}

Vector sample_laplace_vector(Index dim, double scale, Seed seed) {
  Vector out = Vector::Zero(dim);
  if (scale <= 0.0) return out;
  Engine eng = make_engine(seed);
  std::exponential_distribution<double> magnitude(1.0 / scale);
  std::bernoulli_distribution negative(0.5);
  for (Index i = 0; i < dim; ++i) {
    const double m = magnitude(eng);
    out(i) = negative(eng) ? -m : m;
  }
  return out;
}

StructuredGramNoise assemble_structured_noise(double theta_1, Matrix theta_2) {
  const Index p = theta_2.rows();
  Matrix e(2 * p, 2 * p);
  e << theta_2, theta_2, theta_2, theta_2;
  for (Index i = 0; i < p; ++i) {
    e(i, i + p) += theta_1;
    e(i + p, i) += theta_1;
  }
  return StructuredGramNoise{theta_1, std::move(theta_2), std::move(e)};
}

StructuredGramNoise draw_structured_noise(Index p, double theta1_scale, double kappa1_sq,
                                          Seed seed) {
  const double theta_1 =
      sample_laplace_vector(1, theta1_scale, derive_seed(seed, {stream::kTheta1}))(0);
  const Index upper = p * (p - 1) / 2;
  const Vector draws = sample_gaussian_vector(upper, kappa1_sq, derive_seed(seed, {stream::kTheta2}));
  Matrix theta_2 = Matrix::Zero(p, p);
  Index k = 0;
  for (Index i = 0; i < p; ++i) {
    for (Index j = i + 1; j < p; ++j) {
      theta_2(i, j) = draws(k);
      theta_2(j, i) = draws(k);
      ++k;
    }
  }
  return assemble_structured_noise(theta_1, std::move(theta_2));
}

NoiseScales method1_noise_scales(const SensitivityContext& ctx, const PrivacyBudget& budget) {
  validate_budget(budget, ReleaseKind::Method1Pair);
  const auto gs = gram_sensitivities(ctx);
  NoiseScales s;
  s.theta1_scale = laplace_scale(gs.lambda_min_sens, budget.eps_1);
  s.kappa1_sq = gaussian_scale(gs.gram_frob_sens, budget.eps_2, budget.delta);
  s.sensitivity = method1_crossprod_sensitivity(ctx);
  s.kappa2_sq = gaussian_scale(s.sensitivity, budget.eps, budget.delta_1);
  return s;
}

Method1Noise draw_method1_noise(Index p, const NoiseScales& scales, Seed seed) {
  return Method1Noise{draw_structured_noise(p, scales.theta1_scale, scales.kappa1_sq, seed),
                      sample_gaussian_vector(2 * p, scales.kappa2_sq,
                                             derive_seed(seed, {stream::kCrossNoise}))};
}

PrivateRelease assemble_method1(const AugmentedDesign& ad, const Vector& y,
                                const PrivacyBudget& budget, const NoiseScales& scales,
                                const Method1Noise& noise) {
  if (y.size() != ad.n()) throw Error(ErrorKind::DimensionMismatch, "y length != n");
  PrivateRelease r{ReleaseKind::Method1Pair, {}, {}, {}, budget, scales, 0.0, false};
  r.gram_noisy = ad.gram_g + noise.gram.assembled_E;
  r.crossprod_noisy = kernels::cross_product(ad.augmented(), y) + noise.e;
  return r;
}

PrivateRelease release_method1(const AugmentedDesign& ad, const Vector& y,
                               const SensitivityContext& ctx, const PrivacyBudget& budget,
                               Seed seed, ReleaseOptions options) {
  NoiseScales scales = method1_noise_scales(ctx, budget);
  if (options.zero_noise) scales = NoiseScales{0.0, 0.0, 0.0, 0.0, scales.sensitivity};
  PrivateRelease r =
      assemble_method1(ad, y, budget, scales, draw_method1_noise(ad.p(), scales, seed));
  r.zero_noise = options.zero_noise;
  return r;
}

NoiseScales method2_noise_scales(const SensitivityContext& ctx, const PrivacyBudget& budget,
                                 double ridge_omega2) {
  validate_budget(budget, ReleaseKind::Method2Estimate);
  NoiseScales s;
  s.sensitivity = method2_estimate_sensitivity(ctx, ridge_omega2);
  s.kappa_sq = gaussian_scale(s.sensitivity, budget.eps, budget.delta_1);
  return s;
}

Vector draw_method2_noise(Index p, const NoiseScales& scales, Seed seed) {
  return sample_gaussian_vector(2 * p, scales.kappa_sq,
                                derive_seed(seed, {stream::kEstimateNoise}));
}

PrivateRelease assemble_method2(const AugmentedDesign& ad, const Vector& y,
                                const PrivacyBudget& budget, const NoiseScales& scales,
                                double ridge_omega2, const Vector& noise) {
  if (y.size() != ad.n()) throw Error(ErrorKind::DimensionMismatch, "y length != n");
  const Index m = 2 * ad.p();
  const Matrix a = ad.gram_g + ridge_omega2 * Matrix::Identity(m, m);
  const Vector b = kernels::cross_product(ad.augmented(), y);
  PrivateRelease r{ReleaseKind::Method2Estimate, {}, {}, {}, budget, scales, ridge_omega2, false};
  r.estimate_noisy = solve_paired_system(a, b) + noise;
  return r;
}

PrivateRelease release_method2(const AugmentedDesign& ad, const Vector& y,
                               const SensitivityContext& ctx, const PrivacyBudget& budget,
                               double ridge_omega2, Seed seed, ReleaseOptions options) {
  NoiseScales scales = method2_noise_scales(ctx, budget, ridge_omega2);
  if (options.zero_noise) scales = NoiseScales{0.0, 0.0, 0.0, 0.0, scales.sensitivity};
  PrivateRelease r = assemble_method2(ad, y, budget, scales, ridge_omega2,
                                      draw_method2_noise(ad.p(), scales, seed));
  r.zero_noise = options.zero_noise;
  return r;
}

}  // namespace pkf
