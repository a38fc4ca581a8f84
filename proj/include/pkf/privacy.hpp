#pragma once

#include <optional>
#include <utility>

#include "pkf/design.hpp"
#include "pkf/knockoff.hpp"
#include "pkf/rng.hpp"

// Differential-privacy layer for the knockoff filter.
//
// Two releases are supported:
//
//  * Method I perturbs the pair (G', [X' X~']^T y). The Gram matrix gets a
//    structured noise term E = theta1 [[0, I], [I, 0]] + [[1, 1], [1, 1]] (x) theta2
//    with theta1 ~ Lap and theta2 a symmetric zero-diagonal Gaussian matrix;
//    the cross product gets i.i.d. Gaussian noise. Any statistic computed
//    from the noisy pair inherits the privacy of the pair.
//
//  * Method II perturbs the OLS estimate on the augmented normalized design
//    with i.i.d. Gaussian noise.
//
// All sensitivities are local: they are evaluated at the observed design and
// at user-supplied bounds on ||beta|| and sigma^2, so the guarantee holds for
// neighbours of this dataset, not globally.
namespace pkf {

// (eps, delta) knobs. Method I uses all six; Method II uses eps, delta_1 and
// delta_2. `delta` is the Gaussian-mechanism delta of the Gram noise theta2,
// distinct from delta_1 (cross-product noise) and delta_2 (concentration
// event for the noise norm).
struct PrivacyBudget {
  double eps = 0.1;
  double eps_1 = 0.05;
  double eps_2 = 0.05;
  double delta = 1e-3;
  double delta_1 = 1e-3;
  double delta_2 = 1e-3;
};

enum class ReleaseKind { Method1Pair, Method2Estimate };

// Composed (eps, delta) of a release:
//   Method I:  (eps + eps_1 + eps_2, delta + delta_1 + delta_2)
//   Method II: (eps, delta_1 + delta_2)
std::pair<double, double> total_privacy(const PrivacyBudget& budget, ReleaseKind kind);

// Validates that every knob used by `kind` lies in (0, 1).
void validate_budget(const PrivacyBudget& budget, ReleaseKind kind);

// Smallest admissible delta_2 for dimension p: 2 exp(-p/2).
double delta2_floor(Index p);

/// Calibration scalars for one observed dataset.
struct SensitivityContext {
  double eta2;    ///< B^2 / (C_min^2 - B^2)
  double zeta;    ///< 2 p sigma^2 / (1 - sqrt((2/p) ln(2/delta_2)))
  double gamma;   ///< 2 lambda_max(Sigma') - lambda_min(Sigma')
  NormBounds bounds;
  ModelOracle oracle;
  GramSpectrum spectrum;
  double frobenius_sigma_raw;  ///< ||X^T X||_F of the raw design
  Index p;

  double eta() const;
  /// B / eta, which must equal sqrt(C_min^2 - B^2).
  double b_over_eta() const;
};

// ||Sigma||_F of the unnormalized Gram, recovered from X' and D.
double raw_gram_frobenius(const NormalizedDesign& nd, const GramSpectrum& spectrum);

// Throws DeltaTooSmall if delta_2 <= 2 exp(-p/2) and BoundViolation if
// B >= C_min.
SensitivityContext build_sensitivity_context(const NormBounds& bounds, const ModelOracle& oracle,
                                             const GramSpectrum& spectrum,
                                             double raw_gram_frobenius,
                                             const PrivacyBudget& budget, Index p);

struct GramSensitivities {
  double lambda_min_sens;  ///< eta^2 (1 + lambda_min(Sigma'))
  double gram_frob_sens;   ///< eta^2 (sqrt(2) + ||Sigma'||_F)
};

GramSensitivities gram_sensitivities(const SensitivityContext& ctx);

/// l2-sensitivity of [X' X~']^T y:
///
///   zeta^1/2 (2 sqrt(gamma) + eta (3 + 2 lambda_max + lambda_min)^1/2)
///   + ||beta|| [ sqrt(2) (eta/B - 1/C_min) ||Sigma||_F + 2 eta B
///               + (C_min - B/eta) lambda_min + eta^2 (lambda_min + 1) sqrt(C_min^2 + B^2) ]
///
/// with the spectral quantities taken from Sigma' and ||Sigma||_F from the
/// raw Gram.
double method1_crossprod_sensitivity(const SensitivityContext& ctx);

/// l2-sensitivity of the OLS estimate on [X' X~']:
///
///   2 zeta^1/2 / sqrt((1 - eta^2) lambda_min - eta^2) + (C_min - B/eta) ||beta||
///
/// A ridge term omega^2 I added to G' raises lambda_min by omega^2, and the
/// formula is evaluated at the raised value. Throws PrivacyPreconditionFailed
/// unless lambda_min + omega^2 > eta^2 / (1 - eta^2).
double method2_estimate_sensitivity(const SensitivityContext& ctx, double ridge_omega2 = 0.0);

// Gaussian mechanism variance 2 ln(1.25/delta) (sensitivity/eps)^2, bumped by
// a factor (1 + 1e-9) so the strict inequality holds. eps and delta must lie
// in (0, 1).
double gaussian_scale(double sensitivity_l2, double eps, double delta);

// Laplace mechanism scale sensitivity/eps.
double laplace_scale(double sensitivity_l1, double eps);

// i.i.d. N(0, variance) draws.
Vector sample_gaussian_vector(Index dim, double variance, Seed seed);
// i.i.d. Laplace(0, scale) draws.
Vector sample_laplace_vector(Index dim, double scale, Seed seed);

struct StructuredGramNoise {
  double theta_1;
  Matrix theta_2;      ///< p x p, symmetric, zero diagonal
  Matrix assembled_E;  ///< 2p x 2p
};

// Builds E = theta1 [[0, I], [I, 0]] + [[1, 1], [1, 1]] (x) theta2.
StructuredGramNoise assemble_structured_noise(double theta_1, Matrix theta_2);

// theta1 ~ Lap(theta1_scale), upper triangle of theta2 i.i.d. N(0, kappa1_sq).
StructuredGramNoise draw_structured_noise(Index p, double theta1_scale, double kappa1_sq,
                                          Seed seed);

struct NoiseScales {
  double theta1_scale = 0.0;  ///< Laplace scale of theta1 (Method I)
  double kappa1_sq = 0.0;     ///< variance of theta2 entries (Method I)
  double kappa2_sq = 0.0;     ///< variance of the cross-product noise (Method I)
  double kappa_sq = 0.0;      ///< variance of the estimate noise (Method II)
  double sensitivity = 0.0;   ///< l2-sensitivity that set kappa2_sq or kappa_sq
};

struct PrivateRelease {
  ReleaseKind kind;
  std::optional<Matrix> gram_noisy;       ///< Method I
  std::optional<Vector> crossprod_noisy;  ///< Method I
  std::optional<Vector> estimate_noisy;   ///< Method II
  PrivacyBudget budget;
  NoiseScales noise_scales;
  double ridge_omega2 = 0.0;
  bool zero_noise = false;

  std::pair<double, double> total_privacy() const { return pkf::total_privacy(budget, kind); }
};

// Testing switch: zero_noise keeps calibration but adds no noise and
// records zero scales.
struct ReleaseOptions {
  bool zero_noise = false;
};

struct Method1Noise {
  StructuredGramNoise gram;
  Vector e;
};

NoiseScales method1_noise_scales(const SensitivityContext& ctx, const PrivacyBudget& budget);
// Sub-streams for theta1, theta2 and e are split from `seed` by fixed labels.
Method1Noise draw_method1_noise(Index p, const NoiseScales& scales, Seed seed);
PrivateRelease assemble_method1(const AugmentedDesign& ad, const Vector& y,
                                const PrivacyBudget& budget, const NoiseScales& scales,
                                const Method1Noise& noise);
PrivateRelease release_method1(const AugmentedDesign& ad, const Vector& y,
                               const SensitivityContext& ctx, const PrivacyBudget& budget,
                               Seed seed, ReleaseOptions options = {});

NoiseScales method2_noise_scales(const SensitivityContext& ctx, const PrivacyBudget& budget,
                                 double ridge_omega2);
Vector draw_method2_noise(Index p, const NoiseScales& scales, Seed seed);
// (G' + omega^2 I)^-1 [X' X~']^T y + e.
PrivateRelease assemble_method2(const AugmentedDesign& ad, const Vector& y,
                                const PrivacyBudget& budget, const NoiseScales& scales,
                                double ridge_omega2, const Vector& noise);
PrivateRelease release_method2(const AugmentedDesign& ad, const Vector& y,
                               const SensitivityContext& ctx, const PrivacyBudget& budget,
                               double ridge_omega2, Seed seed, ReleaseOptions options = {});

}  // namespace pkf
