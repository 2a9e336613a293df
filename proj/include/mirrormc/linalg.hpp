#pragma once

#include "mirrormc/types.hpp"

namespace mirrormc {

// Singular values below kSingularValueCutoff * sigma_max are treated as
// exactly zero before any spectral scalar function is applied.
inline constexpr double kSingularValueCutoff = 1e-14;

/// Thin SVD, W = U * s.asDiagonal() * V^T, with s nonnegative and descending.
struct ThinSvd {
    Matrix U;  // d x r
    Vector s;  // r = min(d, k)
    Matrix V;  // k x r
};

ThinSvd thin_svd(const Matrix& W);

/// Singular values only, descending, tiny values zeroed as in thin_svd.
Vector singular_values(const Matrix& W);

double min_singular_value(const Matrix& W);

/// Minimum-norm least-squares solution of A x = b with singular values below
/// rank_cutoff * sigma_max treated as zero. Used for row-space projections
/// and the pseudoinverse interpolator, where duplicated rows must not crash.
Vector min_norm_solve(const Matrix& A, const Vector& b,
                      double rank_cutoff = 1e-12);

/// Checks that every entry is finite.
bool all_finite(const Matrix& W);

}  // namespace mirrormc
