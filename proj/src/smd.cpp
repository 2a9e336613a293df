#include "mirrormc/smd.hpp"

#include "mirrormc/io.hpp"
#include "mirrormc/linalg.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

namespace mirrormc {

void SolverConfig::validate() const {
    if (!(eta > 0.0)) throw ConfigError("SolverConfig: eta must be positive");
    if (max_iters < 1) throw ConfigError("SolverConfig: max_iters must be >= 1");
    if (stop_tol < 0.0) throw ConfigError("SolverConfig: negative stop_tol");
    if (record_every < 1) throw ConfigError("SolverConfig: record_every < 1");
    if (batch.scheme == BatchScheme::UniformWithReplacement &&
        batch.batch_size < 1)
        throw ConfigError("SolverConfig: batch size must be >= 1");
}

SolverState init_state(const Matrix& W0, const MirrorMap& mirror,
                       std::uint64_t seed) {
    SolverState state;
    state.W = W0;
    state.dual = mirror.gradient(W0);
    state.iter = 0;
    state.rng.seed(seed);
    return state;
}

void step(SolverState& state, const MirrorMap& mirror, const ScalarLoss& loss,
          const ConstraintSystem& system, double eta, const BatchSpec& batch) {
    state.dual -= eta * batch_gradient(loss, system, state.W, batch);
    state.W = mirror.inverse_gradient(state.dual);
    ++state.iter;
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

TraceRecord make_record(const SolverState& state, const MirrorMap& mirror,
                        const ScalarLoss& loss, const ConstraintSystem& system,
                        const Matrix& dual0, const Matrix* W_ref,
                        double seconds) {
    TraceRecord rec;
    rec.iter = state.iter;
    rec.loss = full_loss(loss, system, state.W);
    // The accumulated dual is the engine's grad psi(W_t). Recomputing the
    // gradient from W_t instead would re-expand singular values through
    // sigma^(q-1) and, for q near 1, lose dual components that sit below
    // the dynamic range of the iterate; the accumulated form is exact.
    const Matrix displacement = state.dual - dual0;
    const auto split = system.project_row_space(displacement);
    rec.kkt_residual =
        split.P_perp.norm() / std::max(1.0, displacement.norm());
    if (W_ref != nullptr) {
        rec.bregman = mirror.potential(*W_ref) - mirror.potential(state.W) -
                      (state.dual.array() * (*W_ref - state.W).array()).sum();
    } else {
        rec.bregman = kNan;
    }
    rec.min_sv = min_singular_value(state.W);
    rec.seconds = seconds;
    return rec;
}

}  // namespace

RunResult run(const Matrix& W0, const MirrorMap& mirror,
              const ScalarLoss& loss, const ConstraintSystem& system,
              const SolverConfig& config, const Matrix* W_ref) {
    config.validate();
    if (W0.rows() != system.d() || W0.cols() != system.k())
        throw DimensionError("run: W0 shape mismatch");

    const auto start = std::chrono::steady_clock::now();
    const auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
            .count();
    };

    SolverState state = init_state(W0, mirror, config.seed);
    const Matrix dual0 = state.dual;
    RunResult result;
    result.trace.records.push_back(
        make_record(state, mirror, loss, system, dual0, W_ref, elapsed()));

    for (Index t = 1; t <= config.max_iters; ++t) {
        if (full_loss(loss, system, state.W) <= config.stop_tol) break;
        const BatchSpec batch =
            sample_batch(state.rng, system.num_constraints(),
                         config.batch.batch_size, config.batch.scheme);
        step(state, mirror, loss, system, config.eta, batch);
        if (!all_finite(state.W))
            throw DivergenceError(
                "SMD diverged at iteration " + std::to_string(state.iter) +
                    " (eta too large for this mirror/loss pair?)",
                state.iter);
        if (t % config.record_every == 0 || t == config.max_iters)
            result.trace.records.push_back(make_record(
                state, mirror, loss, system, dual0, W_ref, elapsed()));
        if (config.time_limit_seconds > 0.0 &&
            elapsed() > config.time_limit_seconds)
            break;
    }
    // The loop may exit between recording points; keep the last state.
    if (result.trace.records.back().iter != state.iter)
        result.trace.records.push_back(
            make_record(state, mirror, loss, system, dual0, W_ref, elapsed()));
    result.W = std::move(state.W);
    return result;
}

KktResidual kkt_residual(const Matrix& W, const Matrix& W0,
                         const MirrorMap& mirror,
                         const ConstraintSystem& system) {
    const Matrix displacement = mirror.gradient(W) - mirror.gradient(W0);
    const auto split = system.project_row_space(displacement);
    KktResidual res;
    res.row_space_residual =
        split.P_perp.norm() / std::max(1.0, displacement.norm());
    res.constraint_violation = (system.apply(W) - system.targets()).norm();
    return res;
}

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace,
                     bool with_timings) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "iter,loss,bregman,kkt_residual,min_sv,seconds\n";
    for (const TraceRecord& rec : trace.records) {
        out << rec.iter << ',' << format_full(rec.loss) << ','
            << format_full(rec.bregman) << ',' << format_full(rec.kkt_residual)
            << ',' << format_full(rec.min_sv) << ','
            << format_full(with_timings ? rec.seconds : 0.0) << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace mirrormc
