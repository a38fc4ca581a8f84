#pragma once

// Test-only reference computations. Nothing here calls into the library's
// numerical paths; each oracle is written from the defining formula.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Scalars that fully determine both sensitivity formulas.
struct CalibrationInputs {
  int p;
  double sigma2;
  double delta2;
  double b;         // row bound
  double c_min;     // min raw column norm
  double beta_norm;
  double lambda_min;
  double lambda_max;
  double sigma_prime_frob;  // ||Sigma'||_F (unused by the formulas below, kept for context)
  double sigma_raw_frob;    // ||Sigma||_F
};

inline long double zeta(const CalibrationInputs& in) {
  const long double p = in.p;
  return 2.0L * p * in.sigma2 / (1.0L - std::sqrt(2.0L / p * std::log(2.0L / in.delta2)));
}

// Cross-product sensitivity, written term by term with eta expanded in B and
// C_min and B/eta replaced by sqrt(C_min^2 - B^2).
inline long double crossprod_sensitivity(const CalibrationInputs& in) {
  const long double b = in.b, c = in.c_min;
  const long double root = std::sqrt(c * c - b * b);  // = B / eta
  const long double eta = b / root;
  const long double eta2 = (b * b) / (c * c - b * b);
  const long double lmin = in.lambda_min, lmax = in.lambda_max;
  const long double z = zeta(in);

  const long double t_noise_a = 2.0L * std::sqrt(z) * std::sqrt(2.0L * lmax - lmin);
  const long double t_noise_b = std::sqrt(z) * eta * std::sqrt(3.0L + 2.0L * lmax + lmin);
  const long double t_frob = std::sqrt(2.0L) * (1.0L / root - 1.0L / c) * in.sigma_raw_frob;
  const long double t_row = 2.0L * eta * b;
  const long double t_shift = (c - root) * lmin;
  const long double t_scale = eta2 * (lmin + 1.0L) * std::sqrt(c * c + b * b);
  return t_noise_a + t_noise_b + in.beta_norm * (t_frob + t_row + t_shift + t_scale);
}

inline long double estimate_sensitivity(const CalibrationInputs& in) {
  const long double b = in.b, c = in.c_min;
  const long double eta2 = (b * b) / (c * c - b * b);
  const long double z = zeta(in);
  const long double lmin = in.lambda_min;
  return 2.0L * std::sqrt(z / ((1.0L - eta2) * lmin - eta2)) +
         (c - std::sqrt(c * c - b * b)) * in.beta_norm;
}

// Cyclic Jacobi eigenvalue iteration for symmetric matrices. Ascending order.
inline std::vector<double> jacobi_eigenvalues(Matrix a) {
  const int n = static_cast<int>(a.rows());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = cs * akp - sn * akq;
          a(k, q) = sn * akp + cs * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = cs * apk - sn * aqk;
          a(q, k) = sn * apk + cs * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

// Knockoff+ threshold by exhaustive search: evaluate every candidate and keep
// the smallest that qualifies.
inline double brute_threshold(const std::vector<double>& w, double q) {
  double best = std::numeric_limits<double>::infinity();
  for (double cand : w) {
    const double t = std::abs(cand);
    if (t == 0.0) continue;
    int neg = 0, pos = 0;
    for (double v : w) {
      if (v <= -t) ++neg;
      if (v >= t) ++pos;
    }
    if ((1.0 + neg) / std::max(pos, 1) <= q) best = std::min(best, t);
  }
  return best;
}

inline double lasso_objective(const Matrix& a, const Vector& c, double lambda, double b0, double b1) {
  Vector b(2);
  b << b0, b1;
  return b.dot(a * b) - 2.0 * c.dot(b) + lambda * (std::abs(b0) + std::abs(b1));
}

struct GridMin {
  double b0, b1, value;
};

// Coarse-to-fine grid search over a box for the 2-dimensional Lasso
// objective b^T A b - 2 c^T b + lambda ||b||_1.
inline GridMin grid_lasso_2d(const Matrix& a, const Vector& c, double lambda, double half_width) {
  GridMin best{0.0, 0.0, lasso_objective(a, c, lambda, 0.0, 0.0)};
  double c0 = 0.0, c1 = 0.0, w = half_width;
  for (int level = 0; level < 6; ++level) {
    const int steps = 400;
    const double h = 2.0 * w / steps;
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; j <= steps; ++j) {
        const double b0 = c0 - w + i * h, b1 = c1 - w + j * h;
        const double v = lasso_objective(a, c, lambda, b0, b1);
        if (v < best.value) best = {b0, b1, v};
      }
    }
    // Include the axes exactly; the minimizer often sits on them.
    for (int i = 0; i <= steps; ++i) {
      const double t = c0 - w + i * h;
      for (auto [b0, b1] : {std::pair{t, 0.0}, std::pair{0.0, c1 - w + i * h}}) {
        const double v = lasso_objective(a, c, lambda, b0, b1);
        if (v < best.value) best = {b0, b1, v};
      }
    }
    c0 = best.b0;
    c1 = best.b1;
    w = 4.0 * h;
  }
  return best;
}

// Random design with correlated columns: X = Z L^T with L from a random
// well-conditioned factor, so the normalized Gram is not near the identity.
inline Matrix random_design(std::mt19937_64& eng, int n, int p, double correlation = 0.0) {
  std::normal_distribution<double> nd;
  Matrix z(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) z(i, j) = nd(eng);
  if (correlation > 0.0) {
    Vector common(n);
    for (int i = 0; i < n; ++i) common(i) = nd(eng);
    for (int j = 0; j < p; ++j) z.col(j) = std::sqrt(1.0 - correlation) * z.col(j) + std::sqrt(correlation) * common;
  }
  std::uniform_real_distribution<double> scale(0.5, 3.0);
  for (int j = 0; j < p; ++j) z.col(j) *= scale(eng);
  return z;
}

// Two-sided exact binomial(n, 1/2) test p-value for observing k successes.
inline double binomial_half_two_sided(long n, long k) {
  auto log_pmf = [n](long i) {
    return std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::log(2.0);
  };
  const double observed = log_pmf(k);
  double p = 0.0;
  for (long i = 0; i <= n; ++i) {
    const double lp = log_pmf(i);
    if (lp <= observed + 1e-9) p += std::exp(lp);
  }
  return std::min(1.0, p);
}

}  // namespace oracle
