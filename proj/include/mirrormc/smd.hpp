#pragma once

#include "mirrormc/losses.hpp"
#include "mirrormc/mirrors.hpp"
#include "mirrormc/operators.hpp"
#include "mirrormc/types.hpp"

#include <filesystem>
#include <random>
#include <vector>

namespace mirrormc {

struct BatchConfig {
    BatchScheme scheme = BatchScheme::Full;
    Index batch_size = 1;  // ignored for the full scheme
};

struct SolverConfig {
    double eta = 1.0;
    Index max_iters = 200;
    BatchConfig batch;
    std::uint64_t seed = 1;
    double stop_tol = 0.0;     // full-loss stopping threshold; 0 runs flat
    Index record_every = 1;
    double time_limit_seconds = 0.0;  // 0 disables the safety cap

    void validate() const;
};

/// Current iterate, its dual image, and the batch RNG. The dual matrix is the
/// source of truth; W is the mirror inverse of it, kept in sync by step().
struct SolverState {
    Matrix W;
    Matrix dual;
    Index iter = 0;
    std::mt19937_64 rng;
};

struct TraceRecord {
    Index iter;
    double loss;
    double bregman;       // divergence to the reference, NaN when absent
    double kkt_residual;  // row-space residual, NaN for mirror-free methods
    double min_sv;        // smallest singular value of the iterate
    double seconds;       // wall clock since run start
};

struct RunTrace {
    std::vector<TraceRecord> records;
};

struct RunResult {
    Matrix W;
    RunTrace trace;
};

SolverState init_state(const Matrix& W0, const MirrorMap& mirror,
                       std::uint64_t seed);

/// One mirror descent step on the given batch:
///   dual <- dual - eta * grad L_batch(W),  W <- inverse_gradient(dual).
void step(SolverState& state, const MirrorMap& mirror, const ScalarLoss& loss,
          const ConstraintSystem& system, double eta, const BatchSpec& batch);

/// Runs the iteration from W0 until full_loss <= stop_tol or max_iters.
/// Deterministic given the seed. Records every record_every iterations (plus
/// the initial and final state); bregman-to-reference is filled when W_ref is
/// given. Throws DivergenceError when an iterate stops being finite.
RunResult run(const Matrix& W0, const MirrorMap& mirror,
              const ScalarLoss& loss, const ConstraintSystem& system,
              const SolverConfig& config, const Matrix* W_ref = nullptr);

struct KktResidual {
    /// ||P_perp(grad psi(W) - grad psi(W0))||_F / max(1, ||.||_F). Zero
    /// characterizes the Bregman projection onto the interpolating set.
    double row_space_residual;
    /// ||A(W) - b||_2, reported separately.
    double constraint_violation;
};

KktResidual kkt_residual(const Matrix& W, const Matrix& W0,
                         const MirrorMap& mirror,
                         const ConstraintSystem& system);

/// Columns iter,loss,bregman,kkt_residual,min_sv,seconds. The seconds column
/// is zeroed unless with_timings is set, keeping repeated runs byte-identical.
void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace,
                     bool with_timings = false);

}  // namespace mirrormc
