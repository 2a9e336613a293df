#include "mirrormc/verification.hpp"

#include "mirrormc/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace mirrormc {

Matrix min_frobenius_interpolator(const ConstraintSystem& system,
                                  const Matrix& W0) {
    const Vector residual = system.targets() - system.apply(W0);
    Vector correction;
    if (system.is_mask_system()) {
        // Indicator rows are orthonormal, so the pseudoinverse is the adjoint.
        return W0 + system.adjoint_apply(residual);
    }
    const Matrix A = system.stacked();
    correction = min_norm_solve(A, residual);
    const double gap = (A * correction - residual).norm();
    if (gap > 1e-8 * std::max(1.0, residual.norm()))
        throw InfeasibleError(
            "min_frobenius_interpolator: targets outside the operator range");
    return W0 + unvec(correction, system.d(), system.k());
}

namespace {

// Bregman divergence with the gradient at the base point supplied by the
// caller. Along a trajectory the engine's accumulated dual IS grad psi of
// the iterate; re-deriving it from the iterate's SVD would lose the dual
// components that a q-near-1 spectral map compresses below double precision.
double bregman_at(const MirrorMap& mirror, const Matrix& U, const Matrix& V,
                  const Matrix& grad_V) {
    return mirror.potential(U) - mirror.potential(V) -
           (grad_V.array() * (U - V).array()).sum();
}

double smd_identity_residual(const MirrorMap& mirror, const ScalarLoss& loss,
                             const ConstraintSystem& system, const Matrix& W,
                             const Matrix& W_prev, const Matrix& dual_prev,
                             const Matrix& W_next, const Matrix& dual_next,
                             double eta, const BatchSpec& batch) {
    const double lhs = bregman_at(mirror, W, W_prev, dual_prev);
    const double d_loss = batch_bregman(loss, system, W, W_prev, batch);
    const double d_next = bregman_at(mirror, W, W_next, dual_next);
    const double d_diff =
        bregman_at(mirror, W_next, W_prev, dual_prev) -
        eta * batch_bregman(loss, system, W_next, W_prev, batch);
    const double step_loss = batch_loss(loss, system, W_next, batch);
    const double rhs = eta * d_loss + d_next + d_diff + eta * step_loss;
    const double scale =
        std::max({1.0, std::abs(lhs), std::abs(eta * d_loss), std::abs(d_next),
                  std::abs(d_diff), std::abs(eta * step_loss)});
    return std::abs(lhs - rhs) / scale;
}

}  // namespace

IdentityReport check_lemma_identities(const MirrorMap& mirror,
                                      const ScalarLoss& loss,
                                      const ConstraintSystem& system,
                                      std::span<const Matrix> sample_points,
                                      const SolverConfig& config,
                                      double tolerance) {
    IdentityReport report;
    report.tolerance = tolerance;

    // Three-point identity over all ordered triples of the samples.
    for (const Matrix& S : sample_points)
        for (const Matrix& U : sample_points)
            for (const Matrix& V : sample_points) {
                const double scale =
                    std::max({1.0, S.norm(), U.norm(), V.norm()});
                report.max_three_point_residual =
                    std::max(report.max_three_point_residual,
                             three_point_check(mirror, S, U, V) / scale);
                ++report.samples;
            }

    // The key per-step identity holds for any interpolating point; drive the
    // engine manually so each step's batch is in hand.
    const Matrix W_interp =
        min_frobenius_interpolator(system, Matrix::Zero(system.d(), system.k()));
    SolverState state = init_state(Matrix::Zero(system.d(), system.k()), mirror,
                                   config.seed);
    for (Index t = 1; t <= config.max_iters; ++t) {
        const BatchSpec batch =
            sample_batch(state.rng, system.num_constraints(),
                         config.batch.batch_size, config.batch.scheme);
        const Matrix W_prev = state.W;
        const Matrix dual_prev = state.dual;
        step(state, mirror, loss, system, config.eta, batch);
        report.max_smd_identity_residual = std::max(
            report.max_smd_identity_residual,
            smd_identity_residual(mirror, loss, system, W_interp, W_prev,
                                  dual_prev, state.W, state.dual, config.eta,
                                  batch));
        ++report.samples;
    }

    report.pass = report.max_three_point_residual <= tolerance &&
                  report.max_smd_identity_residual <= tolerance;
    return report;
}

RateFit fit_rate(const RunTrace& trace, Index burn_in,
                 const std::optional<TheoreticalRate>& theory) {
    std::vector<double> ts, logs;
    for (const TraceRecord& rec : trace.records) {
        if (rec.iter < burn_in) continue;
        if (!(rec.bregman > 0.0))
            throw NumericalError(
                "fit_rate: nonpositive divergence at iteration " +
                std::to_string(rec.iter) +
                " (converged below float resolution; truncate the trace)");
        ts.push_back(static_cast<double>(rec.iter));
        logs.push_back(std::log(rec.bregman));
    }
    if (ts.size() < 2)
        throw NumericalError("fit_rate: need at least two records past burn_in");

    const double n = static_cast<double>(ts.size());
    double mean_t = 0.0, mean_y = 0.0;
    for (size_t i = 0; i < ts.size(); ++i) {
        mean_t += ts[i];
        mean_y += logs[i];
    }
    mean_t /= n;
    mean_y /= n;
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (size_t i = 0; i < ts.size(); ++i) {
        const double dt = ts[i] - mean_t;
        const double dy = logs[i] - mean_y;
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    RateFit fit;
    fit.slope = sty / stt;
    fit.intercept = mean_y - fit.slope * mean_t;
    fit.r_squared = syy > 0.0 ? (sty * sty) / (stt * syy) : 1.0;
    if (theory) {
        fit.theoretical_factor =
            1.0 - theory->eta * theory->mu * theory->sigma_min *
                      theory->sigma_min /
                      (2.0 * static_cast<double>(theory->num_constraints) *
                       theory->L);
    }
    return fit;
}

double estimate_L(const MirrorMap& mirror,
                  std::span<const std::pair<Matrix, Matrix>> pairs) {
    double best = -1.0;
    for (const auto& [U, V] : pairs) {
        const double gap = (U - V).squaredNorm();
        if (gap == 0.0) continue;
        best = std::max(best, bregman(mirror, U, V) / gap);
    }
    if (best < 0.0)
        throw NumericalError("estimate_L: no distinct sample pairs");
    return best;
}

}  // namespace mirrormc
