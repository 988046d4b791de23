#pragma once

#include <vector>

#include "fmlab/core/types.hpp"

namespace fmlab {

inline constexpr double kSymmetryTol = 1e-10;

// max |M - M^T| entry.
double asymmetry(const Mat& m);
// Throws AsymmetryError when asymmetry(m) > tol.
void require_symmetric(const Mat& m, double tol = kSymmetryTol);

// Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations
// run until the off-diagonal Frobenius norm is below 1e-12 (relative to the
// matrix norm when that exceeds one).
Vec sym_eigenvalues(const Mat& m);
double sym_eig_max(const Mat& m);
double sym_eig_min(const Mat& m);

double spectral_norm(const Mat& m);
bool all_finite(const Mat& m);

}  // namespace fmlab
