#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace pkf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Column norms below this are treated as zero.
inline constexpr double kMinColumnNorm = 1e-12;

// A regression design X (n x p) and response y. Construction validates
// n >= 2p, y.size() == n and nonzero columns; the object is immutable after.
class Dataset {
 public:
  Dataset(Matrix x, Vector y);

  const Matrix& x() const noexcept { return x_; }
  const Vector& y() const noexcept { return y_; }
  Index n() const noexcept { return x_.rows(); }
  Index p() const noexcept { return x_.cols(); }

 private:
  Matrix x_;
  Vector y_;
};

// B bounds every row norm of the raw design; C_min is the smallest raw
// column norm. B < C_min is required for the sensitivity calculus.
struct NormBounds {
  double row_bound_b;
  double col_min_c;
};

// X' = X diag(normalizer_d), unit-norm columns.
struct NormalizedDesign {
  Matrix x_prime;
  Vector normalizer_d;  // 1 / ||X^(i)||
  Dataset source;
};

// User-supplied bounds on the unknown model parameters. The simulation fills
// in the ground truth as well.
struct ModelOracle {
  double beta_norm_bound = 0.0;
  double sigma2_bound = 1.0;
  std::optional<Vector> true_beta;
  std::optional<std::vector<Index>> true_support;

  // Builds an oracle from a known coefficient vector; support is {j : beta_j != 0}.
  static ModelOracle from_truth(const Vector& beta, double sigma2);
};

// Reads X (one sample per row, comma separated) and y (one value per line).
// When has_header is set the first line of each file is skipped.
Dataset load_dataset(const std::filesystem::path& x_path, const std::filesystem::path& y_path,
                     bool has_header);

NormalizedDesign normalize_columns(const Dataset& d);

// col_min_c is the exact minimum column norm. row_bound_b is the observed
// maximum row norm unless an override is given. Throws BoundViolation when
// B >= C_min.
NormBounds compute_bounds(const Dataset& d, std::optional<double> row_bound_override = {});

}  // namespace pkf
