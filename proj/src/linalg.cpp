#include "pkf/linalg.hpp"

#include <algorithm>
#include <sstream>

#include "pkf/error.hpp"

namespace pkf {

Vector solve_system(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch, "solve_system: shape mismatch");
  }
  Eigen::PartialPivLU<Matrix> lu(a);
  // The norm estimate alone misses exact zero pivots.
  const Vector pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double pivot_ratio = a.rows() == 0 ? 1.0 : pivots.minCoeff() / pivots.maxCoeff();
  const double rcond = std::min(lu.rcond(), pivot_ratio);
  if (!(rcond >= 1e-14)) {
    std::ostringstream os;
    os << "linear system is numerically singular (rcond=" << rcond << ")";
    throw Error(ErrorKind::SingularSystem, os.str());
  }
  return lu.solve(b);
}

Vector solve_paired_system(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size() || a.rows() % 2 != 0) {
    throw Error(ErrorKind::DimensionMismatch, "solve_paired_system: shape mismatch");
  }
  const Index p = a.rows() / 2;
  Matrix m(2 * p, 2 * p);
  Vector r(2 * p);
  for (Index i = 0; i < p; ++i) {
    r(i) = b(i) + b(i + p);
    r(i + p) = b(i) - b(i + p);
    for (Index j = 0; j < p; ++j) {
      const double aa = a(i, j), ab = a(i, j + p), ac = a(i + p, j), ad = a(i + p, j + p);
      m(i, j) = (aa + ad) + (ab + ac);
      m(i, j + p) = (aa - ad) + (ac - ab);
      m(i + p, j) = (aa - ad) + (ab - ac);
      m(i + p, j + p) = (aa + ad) - (ab + ac);
    }
  }
  const Vector z = solve_system(m, r);
  Vector x(2 * p);
  for (Index i = 0; i < p; ++i) {
    x(i) = z(i) + z(i + p);
    x(i + p) = z(i) - z(i + p);
  }
  return x;
}

Vector symmetric_eigenvalues(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Matrix clip_eigenvalues(const Matrix& a, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const Vector clipped = es.eigenvalues().cwiseMax(floor);
  Matrix out = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace pkf
