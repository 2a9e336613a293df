#pragma once

#include "mirrormc/operators.hpp"
#include "mirrormc/smd.hpp"
#include "mirrormc/types.hpp"

namespace mirrormc {

/// S_tau(W) = U diag(max(sigma_i - tau, 0)) V^T from the thin SVD of W; the
/// proximal operator of tau times the nuclear norm.
Matrix soft_threshold(const Matrix& W, double tau);

struct SvtConfig {
    double tau;
    double delta;
    Index max_iters = 200;
    Index record_every = 1;
    double time_limit_seconds = 0.0;

    void validate() const;
};

struct SoftImputeConfig {
    double lambda;
    Index max_iters = 200;
    Index record_every = 1;
    double time_limit_seconds = 0.0;

    void validate() const;
};

/// Singular value thresholding on a completion system: from Y_0 = 0 iterate
///   W_t = S_tau(Y_{t-1}),  Y_t = Y_{t-1} + delta * P_Omega(M - W_t),
/// where P_Omega keeps observed entries and zeroes the rest. Exactly the
/// two-line scheme, no kickstart scaling. Requires a mask-based system.
RunResult run_svt(const ConstraintSystem& system, const SvtConfig& config);

/// Soft-Impute on a completion system: from W_0 = 0 iterate fill-then-shrink,
///   Z_t = M on Omega / W_t elsewhere,  W_{t+1} = S_lambda(Z_t).
/// Requires a mask-based system.
RunResult run_soft_impute(const ConstraintSystem& system,
                          const SoftImputeConfig& config);

}  // namespace mirrormc
