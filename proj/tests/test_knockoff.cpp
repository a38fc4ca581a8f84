#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pkf/error.hpp"
#include "pkf/knockoff.hpp"

using namespace pkf;

namespace {

GramSpectrum spectrum_with(double lmin, double lmax) {
  Matrix s = Matrix::Identity(2, 2);
  s(0, 0) = lmin;
  s(1, 1) = lmax;
  return GramSpectrum{s, lmin, lmax, s.norm()};
}

NormalizedDesign normalized(const Matrix& x) { return normalize_columns(Dataset(x, Vector::Zero(x.rows()))); }

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Symmetric matrix with prescribed spectrum via a random rotation.
Matrix with_spectrum(std::mt19937_64& eng, const Vector& eigenvalues) {
  const int p = static_cast<int>(eigenvalues.size());
  std::normal_distribution<double> nd;
  Matrix g(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) g(i, j) = nd(eng);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ();
  Matrix s = q * eigenvalues.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

}  // namespace

TEST_CASE("choose_s") {
  CHECK(choose_s(spectrum_with(1.0, 1.0), SChoice::PrivateRecommended) == 1.0);
  CHECK(choose_s(spectrum_with(0.3, 1.7), SChoice::Classic) == doctest::Approx(0.6));
  CHECK(choose_s(spectrum_with(0.7, 1.3), SChoice::Classic) == 1.0);
  CHECK(choose_s(spectrum_with(0.3, 1.7), SChoice::PrivateRecommended) == 0.3);
}

TEST_CASE("identity Gram gives knockoffs orthogonal to the originals") {
  Matrix x = Matrix::Zero(10, 3);
  for (int j = 0; j < 3; ++j) x(2 * j, j) = 1.0;
  const auto ad = build_knockoffs(normalized(x), 1.0);
  CHECK(max_abs(ad.design.x_prime.transpose() * ad.knockoff) < 1e-12);
  CHECK(max_abs(ad.knockoff.transpose() * ad.knockoff - Matrix::Identity(3, 3)) < 1e-12);
}

TEST_CASE("s = 0 reproduces the design") {
  std::mt19937_64 eng(3);
  const auto nd = normalized(oracle::random_design(eng, 30, 4, 0.4));
  const auto ad = build_knockoffs(nd, 0.0);
  CHECK(ad.knockoff == nd.x_prime);
}

TEST_CASE("Gram identity on random designs") {
  std::mt19937_64 eng(101);
  std::uniform_int_distribution<int> pick_p(2, 30);
  for (int rep = 0; rep < 100; ++rep) {
    const int p = pick_p(eng);
    std::uniform_int_distribution<int> pick_n(2 * p, 10 * p);
    const int n = pick_n(eng);
    const auto nd = normalized(oracle::random_design(eng, n, p, 0.5 * (rep % 3) / 2.0));
    const auto spec = compute_spectrum(nd);
    const auto ad = build_knockoffs(nd, spec, spec.lambda_min);
    const Matrix aug = ad.augmented();
    const Matrix target = target_gram(spec.sigma_prime, ad.s_value);
    CHECK(max_abs(aug.transpose() * aug - target) <= 1e-8);
    CHECK(max_abs(ad.gram_g - target) <= 1e-8);
    CHECK(max_abs(ad.knockoff.transpose() * ad.knockoff - spec.sigma_prime) <= 1e-8);
    CHECK(oracle::jacobi_eigenvalues(ad.gram_g).front() >= -1e-8);
    CHECK(max_abs(spec.sigma_prime - spec.sigma_prime.transpose()) <= 1e-10);
    CHECK((spec.sigma_prime.diagonal().array() - 1.0).abs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("complement basis is orthonormal and orthogonal to the design") {
  std::mt19937_64 eng(8);
  for (auto [n, p] : {std::pair{20, 10}, std::pair{200, 7}, std::pair{57, 13}}) {
    const auto nd = normalized(oracle::random_design(eng, n, p, 0.3));
    const Matrix u = complement_basis(nd.x_prime);
    CHECK(u.rows() == n);
    CHECK(u.cols() == p);
    CHECK(max_abs(u.transpose() * nd.x_prime) <= 1e-9);
    CHECK(max_abs(u.transpose() * u - Matrix::Identity(p, p)) <= 1e-9);
  }
}

TEST_CASE("construction is deterministic") {
  std::mt19937_64 eng(77);
  const auto nd = normalized(oracle::random_design(eng, 120, 9, 0.3));
  const auto a = build_knockoffs(nd, compute_spectrum(nd).lambda_min);
  const auto b = build_knockoffs(nd, compute_spectrum(nd).lambda_min);
  CHECK(std::equal(a.knockoff.data(), a.knockoff.data() + a.knockoff.size(), b.knockoff.data()));
}

TEST_CASE("infeasible s is rejected") {
  Matrix x = Matrix::Zero(10, 3);
  for (int j = 0; j < 3; ++j) x(2 * j, j) = 1.0;
  try {
    build_knockoffs(normalized(x), 3.0);
    FAIL("expected KnockoffInfeasible");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::KnockoffInfeasible);
  }
}

TEST_CASE("augmented Gram eigenvalue identity") {
  const auto lemma = lemma_eigenvalues(spectrum_with(1.0, 1.0), 1.0);
  CHECK(lemma.lambda_max_g == 1.0);
  CHECK(lemma.lambda_min_g == 1.0);

  std::mt19937_64 eng(12);
  Vector ev(4);
  ev << 0.5, 0.9, 1.4, 2.0;
  const Matrix sigma = with_spectrum(eng, ev);
  const auto spec = compute_spectrum(sigma);
  const auto l = lemma_eigenvalues(spec, spec.lambda_min);
  CHECK(l.lambda_max_g == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(l.lambda_min_g == doctest::Approx(0.5).epsilon(1e-12));
  const auto explicit_ev = oracle::jacobi_eigenvalues(target_gram(sigma, spec.lambda_min));
  CHECK(std::abs(explicit_ev.front() - l.lambda_min_g) <= 1e-8);
  CHECK(std::abs(explicit_ev.back() - l.lambda_max_g) <= 1e-8);

  try {
    lemma_eigenvalues(spec, spec.lambda_min + 1e-6);
    FAIL("expected PreconditionViolated");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PreconditionViolated);
  }
}

TEST_CASE("classic s = 2 lambda_min <= 1 makes G' singular") {
  std::mt19937_64 eng(44);
  Vector ev(3);
  ev << 0.2, 1.0, 1.8;
  const Matrix sigma = with_spectrum(eng, ev);
  const auto spec = compute_spectrum(sigma);
  const double s = choose_s(spec, SChoice::Classic);
  CHECK(s == doctest::Approx(0.4));
  CHECK(std::abs(target_gram_min_eigenvalue(sigma, s)) <= 1e-8);
}
