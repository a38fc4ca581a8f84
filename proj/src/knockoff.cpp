#include "pkf/knockoff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pkf/error.hpp"
#include "pkf/kernels.hpp"

namespace pkf {

namespace {

constexpr double kCholeskyJitter = 1e-10;
constexpr double kLemmaTolerance = 1e-10;

}  // namespace

GramSpectrum compute_spectrum(const Matrix& sigma_prime) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_prime, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidDesign, "eigendecomposition of the Gram matrix failed");
  }
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 1e-12 * std::max(1.0, lmax))) {
    std::ostringstream os;
    os << "normalized Gram matrix is singular (lambda_min=" << lmin << ")";
    throw Error(ErrorKind::InvalidDesign, os.str());
  }
  return GramSpectrum{sigma_prime, lmin, lmax, sigma_prime.norm()};
}

GramSpectrum compute_spectrum(const NormalizedDesign& nd) {
  return compute_spectrum(kernels::gram(nd.x_prime));
}

Matrix AugmentedDesign::augmented() const {
  Matrix a(n(), 2 * p());
  a << design.x_prime, knockoff;
  return a;
}

double choose_s(const GramSpectrum& spectrum, SChoice mode) {
  switch (mode) {
    case SChoice::PrivateRecommended: return spectrum.lambda_min;
    case SChoice::Classic: return std::min(2.0 * spectrum.lambda_min, 1.0);
  }
  return spectrum.lambda_min;
}

Matrix complement_basis(const Matrix& x_prime) {
  const Index n = x_prime.rows();
  const Index p = x_prime.cols();
  Eigen::HouseholderQR<Matrix> qr(x_prime);
  Matrix pick = Matrix::Zero(n, p);
  pick.block(p, 0, p, p).setIdentity();
  return qr.householderQ() * pick;
}

AugmentedDesign build_knockoffs(const NormalizedDesign& nd, double s) {
  return build_knockoffs(nd, compute_spectrum(nd), s);
}

AugmentedDesign build_knockoffs(const NormalizedDesign& nd, const GramSpectrum& spectrum,
                                double s) {
  const Index n = nd.x_prime.rows();
  const Index p = nd.x_prime.cols();
  if (n < 2 * p) {
    throw Error(ErrorKind::KnockoffInfeasible, "fixed-X knockoffs need n >= 2p");
  }
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw Error(ErrorKind::KnockoffInfeasible, "s must be finite and non-negative");
  }

  Eigen::LDLT<Matrix> sigma_ldlt(spectrum.sigma_prime);
  if (sigma_ldlt.info() != Eigen::Success) {
    throw Error(ErrorKind::KnockoffInfeasible, "Gram matrix factorization failed");
  }
  // s * Sigma'^-1, by solving against s I.
  Matrix s_sigma_inv = sigma_ldlt.solve(Matrix::Identity(p, p) * s);
  s_sigma_inv = 0.5 * (s_sigma_inv + s_sigma_inv.transpose()).eval();

  Matrix knockoff = nd.x_prime - nd.x_prime * s_sigma_inv;

  if (s > 0.0) {
    // Schur complement 2sI - s^2 Sigma'^-1.
    Matrix schur = 2.0 * s * Matrix::Identity(p, p) - s * s_sigma_inv;
    Eigen::LLT<Matrix> llt(schur);
    if (llt.info() != Eigen::Success) {
      llt.compute(schur + kCholeskyJitter * Matrix::Identity(p, p));
      if (llt.info() != Eigen::Success) {
        throw Error(ErrorKind::KnockoffInfeasible,
                    "Schur complement 2sI - s^2 Sigma'^-1 is not positive definite; s too large");
      }
    }
    const Matrix c = llt.matrixU();
    knockoff.noalias() += complement_basis(nd.x_prime) * c;
  }

  AugmentedDesign ad{nd, std::move(knockoff), s, Matrix(), spectrum};
  ad.gram_g = kernels::gram(ad.augmented());
  return ad;
}

Matrix target_gram(const Matrix& sigma_prime, double s) {
  const Index p = sigma_prime.rows();
  const Matrix off = sigma_prime - s * Matrix::Identity(p, p);
  Matrix g(2 * p, 2 * p);
  g << sigma_prime, off, off, sigma_prime;
  return g;
}

LemmaEigenvalues lemma_eigenvalues(const GramSpectrum& spectrum, double s) {
  if (std::abs(s - spectrum.lambda_min) > kLemmaTolerance) {
    std::ostringstream os;
    os << "eigenvalue identity needs s = lambda_min(Sigma') = " << spectrum.lambda_min
       << ", got s = " << s;
    throw Error(ErrorKind::PreconditionViolated, os.str());
  }
  return {2.0 * spectrum.lambda_max - spectrum.lambda_min, spectrum.lambda_min};
}

double target_gram_min_eigenvalue(const Matrix& sigma_prime, double s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(target_gram(sigma_prime, s), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace pkf
