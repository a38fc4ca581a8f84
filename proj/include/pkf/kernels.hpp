#pragma once

#include <Eigen/Dense>

// Dense inner-product kernels shared by the knockoff pipeline.
//
// Each kernel exists twice: a plain serial reference and an OpenMP version.
// Both compute every output entry with the same arithmetic in the same order,
// so their results are bitwise identical for any thread count. The test suite
// holds them to that.
namespace pkf::kernels {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixCRef = Eigen::Ref<const Matrix>;
using VectorCRef = Eigen::Ref<const Vector>;

namespace serial {
Matrix gram(MatrixCRef a);
Vector cross_product(MatrixCRef a, VectorCRef y);
Vector column_norms(MatrixCRef a);
double max_row_norm(MatrixCRef a);
}  // namespace serial

namespace parallel {
Matrix gram(MatrixCRef a);
Vector cross_product(MatrixCRef a, VectorCRef y);
Vector column_norms(MatrixCRef a);
double max_row_norm(MatrixCRef a);
}  // namespace parallel

// Dispatchers: use the OpenMP kernels unless already inside a parallel region
// (trial-level parallelism in the simulation harness) or the problem is tiny.
Matrix gram(MatrixCRef a);
Vector cross_product(MatrixCRef a, VectorCRef y);
Vector column_norms(MatrixCRef a);
double max_row_norm(MatrixCRef a);

}  // namespace pkf::kernels
