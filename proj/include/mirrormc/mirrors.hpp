#pragma once

#include "mirrormc/types.hpp"

#include <memory>
#include <optional>
#include <string>

namespace mirrormc {

/// Strictly convex spectral potential with its dual-space maps. The inverse
/// gradient is first class here: the mirror descent iteration accumulates in
/// dual space and cannot return without it. Implementations are immutable
/// configuration; every operation is pure.
class MirrorMap {
  public:
    virtual ~MirrorMap() = default;

    virtual double potential(const Matrix& W) const = 0;
    virtual Matrix gradient(const Matrix& W) const = 0;
    /// Returns W with gradient(W) == Z.
    virtual Matrix inverse_gradient(const Matrix& Z) const = 0;

    /// Modulus nu with D_psi(U, V) >= (nu/2) ||U - V||_F^2, when known.
    virtual std::optional<double> strong_convexity_modulus() const = 0;

    virtual std::string describe() const = 0;
};

/// psi(W) = (c/2) ||W||_F^2. With c = 1 the mirror map is the identity and
/// the iteration reduces to plain SGD.
class FrobeniusMirror final : public MirrorMap {
  public:
    explicit FrobeniusMirror(double scale = 1.0);

    double potential(const Matrix& W) const override;
    Matrix gradient(const Matrix& W) const override;
    Matrix inverse_gradient(const Matrix& Z) const override;
    std::optional<double> strong_convexity_modulus() const override;
    std::string describe() const override;

    double scale() const { return scale_; }

  private:
    double scale_;
};

/// psi(W) = sum_i sigma_i(W)^q + ridge ||W||_F^2 with q > 1, ridge >= 0.
/// q slightly above 1 approximates the nuclear norm and biases the iteration
/// toward low rank; the ridge restores strong convexity.
class SchattenMirror final : public MirrorMap {
  public:
    SchattenMirror(double exponent, double ridge = 0.0);

    double potential(const Matrix& W) const override;
    Matrix gradient(const Matrix& W) const override;
    Matrix inverse_gradient(const Matrix& Z) const override;
    std::optional<double> strong_convexity_modulus() const override;
    std::string describe() const override;

    double exponent() const { return exponent_; }
    double ridge() const { return ridge_; }

    /// Scalar dual map g(sigma) = q sigma^(q-1) + 2 ridge sigma and its
    /// inverse on [0, inf). Exposed for the root-finder tests.
    double dual_scalar(double sigma) const;
    double invert_dual_scalar(double s) const;

  private:
    double exponent_;
    double ridge_;
};

/// D_psi(U, V) = psi(U) - psi(V) - <grad psi(V), U - V>_F.
double bregman(const MirrorMap& m, const Matrix& U, const Matrix& V);

/// Residual of the three-point identity
///   D(V,S) + D(S,U) - D(V,U) = <grad psi(U) - grad psi(S), V - S>_F,
/// which should vanish for any differentiable potential.
double three_point_check(const MirrorMap& m, const Matrix& S, const Matrix& U,
                         const Matrix& V);

}  // namespace mirrormc
