#pragma once

#include "pkf/design.hpp"

namespace pkf {

// Spectral summary of the normalized Gram matrix Sigma' = X'^T X'.
struct GramSpectrum {
  Matrix sigma_prime;
  double lambda_min;
  double lambda_max;
  double frobenius_norm;
};

// Throws InvalidDesign if Sigma' is numerically singular.
GramSpectrum compute_spectrum(const NormalizedDesign& nd);
GramSpectrum compute_spectrum(const Matrix& sigma_prime);

// Normalized design plus its fixed-X knockoff copy. gram_g is the empirical
// Gram matrix of [X' X~'], which equals
//   [ Sigma'       Sigma' - sI ]
//   [ Sigma' - sI  Sigma'      ]
// up to rounding.
struct AugmentedDesign {
  NormalizedDesign design;
  Matrix knockoff;
  double s_value;
  Matrix gram_g;
  GramSpectrum spectrum;

  Index p() const noexcept { return design.x_prime.cols(); }
  Index n() const noexcept { return design.x_prime.rows(); }
  // [X' X~'], n x 2p.
  Matrix augmented() const;
};

enum class SChoice {
  PrivateRecommended,  // s = lambda_min(Sigma')
  Classic,             // s = min(2 lambda_min(Sigma'), 1)
};

double choose_s(const GramSpectrum& spectrum, SChoice mode);

// X~' = X'(I - s Sigma'^-1) + U C with U an orthonormal basis of p directions
// orthogonal to col(X') and C^T C = 2sI - s^2 Sigma'^-1. U is taken from a
// Householder QR of X' (columns p..2p-1 of the full Q), so the construction is
// deterministic in its input. Throws KnockoffInfeasible when n < 2p or the
// Schur complement cannot be factored.
AugmentedDesign build_knockoffs(const NormalizedDesign& nd, double s);
AugmentedDesign build_knockoffs(const NormalizedDesign& nd, const GramSpectrum& spectrum, double s);

// Orthonormal n x p basis orthogonal to the columns of x_prime.
Matrix complement_basis(const Matrix& x_prime);

// The block matrix the knockoff Gram should equal, built from Sigma' and s.
Matrix target_gram(const Matrix& sigma_prime, double s);

struct LemmaEigenvalues {
  double lambda_max_g;
  double lambda_min_g;
};

// Extreme eigenvalues of G' when s = lambda_min(Sigma'):
//   lambda_max(G') = 2 lambda_max(Sigma') - lambda_min(Sigma'),
//   lambda_min(G') = lambda_min(Sigma').
// Throws PreconditionViolated unless |s - lambda_min| <= 1e-10.
LemmaEigenvalues lemma_eigenvalues(const GramSpectrum& spectrum, double s);

// Smallest eigenvalue of target_gram(sigma_prime, s). With the classic choice
// s = 2 lambda_min <= 1 this is zero, i.e. G' is singular.
double target_gram_min_eigenvalue(const Matrix& sigma_prime, double s);

}  // namespace pkf
