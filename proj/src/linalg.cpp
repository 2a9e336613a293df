#include "mirrormc/linalg.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace mirrormc {

namespace {

void zero_tiny(Vector& s) {
    if (s.size() == 0) return;
    const double cutoff = kSingularValueCutoff * s(0);
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) < cutoff) s(i) = 0.0;
}

}  // namespace

ThinSvd thin_svd(const Matrix& W) {
    Eigen::BDCSVD<Matrix> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
    ThinSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    zero_tiny(out.s);
    return out;
}

Vector singular_values(const Matrix& W) {
    Eigen::BDCSVD<Matrix> svd(W);
    Vector s = svd.singularValues();
    zero_tiny(s);
    return s;
}

double min_singular_value(const Matrix& W) {
    const Vector s = singular_values(W);
    return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

Vector min_norm_solve(const Matrix& A, const Vector& b, double rank_cutoff) {
    Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double cutoff = s.size() > 0 ? rank_cutoff * s(0) : 0.0;
    Vector coeffs = svd.matrixU().transpose() * b;
    for (Index i = 0; i < s.size(); ++i)
        coeffs(i) = s(i) > cutoff ? coeffs(i) / s(i) : 0.0;
    return svd.matrixV() * coeffs;
}

bool all_finite(const Matrix& W) {
    return W.allFinite();
}

}  // namespace mirrormc
