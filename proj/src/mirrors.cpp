#include "mirrormc/mirrors.hpp"

#include "mirrormc/linalg.hpp"

#include <cmath>
#include <sstream>

namespace mirrormc {

FrobeniusMirror::FrobeniusMirror(double scale) : scale_(scale) {
    if (!(scale > 0.0))
        throw ConfigError("FrobeniusMirror: scale must be positive");
}

double FrobeniusMirror::potential(const Matrix& W) const {
    return 0.5 * scale_ * W.squaredNorm();
}

Matrix FrobeniusMirror::gradient(const Matrix& W) const {
    return scale_ * W;
}

Matrix FrobeniusMirror::inverse_gradient(const Matrix& Z) const {
    return Z / scale_;
}

std::optional<double> FrobeniusMirror::strong_convexity_modulus() const {
    return scale_;
}

std::string FrobeniusMirror::describe() const {
    std::ostringstream ss;
    ss << "frobenius(scale=" << scale_ << ")";
    return ss.str();
}

SchattenMirror::SchattenMirror(double exponent, double ridge)
    : exponent_(exponent), ridge_(ridge) {
    if (!(exponent > 1.0))
        throw ConfigError("SchattenMirror: exponent must exceed 1");
    if (!(ridge >= 0.0))
        throw ConfigError("SchattenMirror: ridge must be nonnegative");
}

double SchattenMirror::potential(const Matrix& W) const {
    const Vector s = singular_values(W);
    double sum = 0.0;
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) > 0.0) sum += std::pow(s(i), exponent_);
    return sum + ridge_ * W.squaredNorm();
}

double SchattenMirror::dual_scalar(double sigma) const {
    if (sigma <= 0.0) return 0.0;
    return exponent_ * std::pow(sigma, exponent_ - 1.0) + 2.0 * ridge_ * sigma;
}

Matrix SchattenMirror::gradient(const Matrix& W) const {
    ThinSvd svd = thin_svd(W);
    for (Index i = 0; i < svd.s.size(); ++i)
        svd.s(i) = dual_scalar(svd.s(i));
    return svd.U * svd.s.asDiagonal() * svd.V.transpose();
}

double SchattenMirror::invert_dual_scalar(double s) const {
    if (s <= 1e-300) return 0.0;
    const double q = exponent_;
    // q sigma^(q-1) = s in the log domain; the direct power overflows for
    // exponents 1/(q-1) as large as 20 when q = 1.05.
    const double power_root = std::exp(std::log(s / q) / (q - 1.0));
    if (ridge_ == 0.0) {
        if (q == 2.0) return s / 2.0;
        return power_root;
    }
    // g is strictly increasing on [0, inf), so the unique root sits inside
    // [0, s/(2 ridge) + (s/q)^(1/(q-1))]. Safeguarded Newton, bisection when
    // a step leaves the bracket or stalls.
    double lo = 0.0;
    double hi = s / (2.0 * ridge_);  // g(sigma) >= 2 ridge sigma
    if (std::isfinite(power_root)) hi += power_root;
    double x = std::min(power_root, s / (2.0 * ridge_));
    if (!(x > lo && x < hi)) x = 0.5 * hi;
    const double rel_tol = 1e-13;
    for (int it = 0; it < 200; ++it) {
        const double g = dual_scalar(x) - s;
        if (std::abs(g) <= rel_tol * std::max(1.0, s)) return x;
        if (g > 0.0)
            hi = x;
        else
            lo = x;
        if (hi - lo <= rel_tol * std::max(1.0, hi)) return 0.5 * (lo + hi);
        const double dg =
            q * (q - 1.0) * std::pow(x, q - 2.0) + 2.0 * ridge_;
        double next = x - g / dg;
        if (!std::isfinite(next) || next <= lo || next >= hi || next == x)
            next = 0.5 * (lo + hi);
        x = next;
    }
    throw NumericalError(
        "SchattenMirror: dual inversion did not converge for singular value " +
        std::to_string(s));
}

Matrix SchattenMirror::inverse_gradient(const Matrix& Z) const {
    ThinSvd svd = thin_svd(Z);
    for (Index i = 0; i < svd.s.size(); ++i)
        svd.s(i) = invert_dual_scalar(svd.s(i));
    return svd.U * svd.s.asDiagonal() * svd.V.transpose();
}

std::optional<double> SchattenMirror::strong_convexity_modulus() const {
    // The ridge contributes 2*ridge; the Schatten term adds 2 only at q = 2,
    // where it equals the squared Frobenius norm.
    double modulus = 2.0 * ridge_;
    if (exponent_ == 2.0) modulus += 2.0;
    if (modulus > 0.0) return modulus;
    return std::nullopt;
}

std::string SchattenMirror::describe() const {
    std::ostringstream ss;
    ss << "schatten(q=" << exponent_ << ",nu=" << ridge_ << ")";
    return ss.str();
}

double bregman(const MirrorMap& m, const Matrix& U, const Matrix& V) {
    if (U.rows() != V.rows() || U.cols() != V.cols())
        throw DimensionError("bregman: shape mismatch");
    const Matrix G = m.gradient(V);
    return m.potential(U) - m.potential(V) -
           (G.array() * (U - V).array()).sum();
}

double three_point_check(const MirrorMap& m, const Matrix& S, const Matrix& U,
                         const Matrix& V) {
    const double lhs = bregman(m, V, S) + bregman(m, S, U) - bregman(m, V, U);
    const Matrix G = m.gradient(U) - m.gradient(S);
    const double rhs = (G.array() * (V - S).array()).sum();
    return std::abs(lhs - rhs);
}

}  // namespace mirrormc
