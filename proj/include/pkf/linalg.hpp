#pragma once

#include "pkf/design.hpp"

namespace pkf {

// Solves a x = b by partial-pivot LU. a may be indefinite (noisy Gram
// matrices are). Throws SingularSystem when the reciprocal condition
// estimate falls below 1e-14.
Vector solve_system(const Matrix& a, const Vector& b);

// Same solution for a 2p system, computed in the coordinates
// (x_i + x_{i+p}, x_i - x_{i+p}). Exchanging i and i + p in both a and b
// then flips a sign in that basis, so the result is exchanged exactly.
Vector solve_paired_system(const Matrix& a, const Vector& b);

// Ascending eigenvalues of a symmetric matrix.
Vector symmetric_eigenvalues(const Matrix& a);

// Clips the spectrum of a symmetric matrix from below at `floor`.
Matrix clip_eigenvalues(const Matrix& a, double floor);

}  // namespace pkf
