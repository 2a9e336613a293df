#pragma once

#include "mirrormc/losses.hpp"
#include "mirrormc/mirrors.hpp"
#include "mirrormc/operators.hpp"
#include "mirrormc/smd.hpp"
#include "mirrormc/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mirrormc {

/// Bregman projection of W0 onto {A(W) = b} under the Frobenius mirror:
///   W0 + reshape(A^T (A A^T)^+ (b - A vec(W0))),
/// the exact minimum-Frobenius-distance interpolator, used as ground truth
/// for the implicit-bias checks. Throws InfeasibleError when b is not in the
/// range of A.
Matrix min_frobenius_interpolator(const ConstraintSystem& system,
                                  const Matrix& W0);

struct IdentityReport {
    double max_three_point_residual = 0.0;
    double max_smd_identity_residual = 0.0;
    double tolerance;  // residuals are already normalized by scale
    Index samples = 0;
    bool pass = false;
};

/// Numerically exercises the two identities behind the convergence proof:
/// the three-point identity over random triples drawn around the supplied
/// sample points, and the per-step mirror descent identity
///   D_psi(W, W_{t-1}) = eta D_L(W, W_{t-1}) + D_psi(W, W_t)
///                       + D_{psi - eta L}(W_t, W_{t-1}) + eta L(W_t)
/// for interpolating W along a live trajectory driven by config.
IdentityReport check_lemma_identities(const MirrorMap& mirror,
                                      const ScalarLoss& loss,
                                      const ConstraintSystem& system,
                                      std::span<const Matrix> sample_points,
                                      const SolverConfig& config,
                                      double tolerance = 1e-8);

struct RateFit {
    double slope = 0.0;      // per-iteration log decay of the divergence
    double intercept = 0.0;
    double r_squared = 0.0;
    std::optional<double> theoretical_factor;  // in (0, 1) when supplied
};

struct TheoreticalRate {
    double eta;
    double mu;
    double sigma_min;       // smallest singular value of the stacked operator
    double L;               // max D_psi(U,V) / ||U-V||_F^2 over the ball
    Index num_constraints;
};

/// Least-squares line through (iter, log bregman) for records past burn_in.
/// Throws NumericalError when fewer than two positive divergences remain
/// (converged below float resolution; truncate the trace first).
RateFit fit_rate(const RunTrace& trace, Index burn_in,
                 const std::optional<TheoreticalRate>& theory = std::nullopt);

/// Largest sampled ratio D_psi(U, V) / ||U - V||_F^2; a lower bound on the
/// true constant over any set containing the samples. Identical pairs are
/// skipped; throws when none remain.
double estimate_L(const MirrorMap& mirror,
                  std::span<const std::pair<Matrix, Matrix>> pairs);

}  // namespace mirrormc
