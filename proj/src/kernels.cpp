#include "pkf/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <omp.h>

namespace pkf::kernels {

namespace {

constexpr Eigen::Index kRowChunk = 4096;

// Squared row norms for rows [begin, end), accumulated column by column.
void row_sq_norms(MatrixCRef a, Eigen::Index begin, Eigen::Index end, Vector& out) {
  const Eigen::Index len = end - begin;
  out.segment(begin, len).setZero();
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    out.segment(begin, len) += a.col(j).segment(begin, len).cwiseAbs2();
  }
}

// Gram of rows [begin, end) with both triangles filled.
Matrix chunk_gram(MatrixCRef a, Eigen::Index begin, Eigen::Index end) {
  const Eigen::Index p = a.cols();
  Matrix g = Matrix::Zero(p, p);
  g.selfadjointView<Eigen::Lower>().rankUpdate(a.middleRows(begin, end - begin).transpose());
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

bool worth_parallel(MatrixCRef a) {
  return !omp_in_parallel() && omp_get_max_threads() > 1 && a.size() >= 20000;
}

}  // namespace

namespace serial {

Matrix gram(MatrixCRef a) {
  const Eigen::Index p = a.cols();
  Matrix g = Matrix::Zero(p, p);
  for (Eigen::Index b = 0; b < a.rows(); b += kRowChunk) {
    g += chunk_gram(a, b, std::min(a.rows(), b + kRowChunk));
  }
  return g;
}

Vector cross_product(MatrixCRef a, VectorCRef y) {
  Vector out(a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) out(j) = a.col(j).dot(y);
  return out;
}

Vector column_norms(MatrixCRef a) {
  Vector out(a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) out(j) = std::sqrt(a.col(j).squaredNorm());
  return out;
}

double max_row_norm(MatrixCRef a) {
  Vector sq(a.rows());
  for (Eigen::Index b = 0; b < a.rows(); b += kRowChunk) {
    row_sq_norms(a, b, std::min(a.rows(), b + kRowChunk), sq);
  }
  return a.rows() == 0 ? 0.0 : std::sqrt(sq.maxCoeff());
}

}  // namespace serial

namespace parallel {

Matrix gram(MatrixCRef a) {
  const Eigen::Index p = a.cols();
  const Eigen::Index chunks = (a.rows() + kRowChunk - 1) / kRowChunk;
  std::vector<Matrix> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index b = c * kRowChunk;
    partial[static_cast<std::size_t>(c)] = chunk_gram(a, b, std::min(a.rows(), b + kRowChunk));
  }
  Matrix g = Matrix::Zero(p, p);
  for (const Matrix& m : partial) g += m;
  return g;
}

Vector cross_product(MatrixCRef a, VectorCRef y) {
  Vector out(a.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < a.cols(); ++j) out(j) = a.col(j).dot(y);
  return out;
}

Vector column_norms(MatrixCRef a) {
  Vector out(a.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < a.cols(); ++j) out(j) = std::sqrt(a.col(j).squaredNorm());
  return out;
}

double max_row_norm(MatrixCRef a) {
  Vector sq(a.rows());
  const Eigen::Index chunks = (a.rows() + kRowChunk - 1) / kRowChunk;
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index b = c * kRowChunk;
    row_sq_norms(a, b, std::min(a.rows(), b + kRowChunk), sq);
  }
  return a.rows() == 0 ? 0.0 : std::sqrt(sq.maxCoeff());
}

}  // namespace parallel

Matrix gram(MatrixCRef a) {
  return worth_parallel(a) ? parallel::gram(a) : serial::gram(a);
}

Vector cross_product(MatrixCRef a, VectorCRef y) {
  return worth_parallel(a) ? parallel::cross_product(a, y) : serial::cross_product(a, y);
}

Vector column_norms(MatrixCRef a) {
  return worth_parallel(a) ? parallel::column_norms(a) : serial::column_norms(a);
}

double max_row_norm(MatrixCRef a) {
  return worth_parallel(a) ? parallel::max_row_norm(a) : serial::max_row_norm(a);
}

}  // namespace pkf::kernels
