#include "mirrormc/baselines.hpp"

#include "mirrormc/linalg.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace mirrormc {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void require_mask(const ConstraintSystem& system, const char* who) {
    if (!system.is_mask_system())
        throw ConfigError(std::string(who) + ": requires a mask-based system");
}

// Mean squared residual on the observed entries, matching full_loss with the
// squared loss so baseline traces share the SMD trace semantics.
double observed_loss(const ConstraintSystem& system, const Matrix& W) {
    const Vector res = system.apply(W) - system.targets();
    return 0.5 * res.squaredNorm() / static_cast<double>(res.size());
}

TraceRecord make_record(Index iter, const ConstraintSystem& system,
                        const Matrix& W, double min_sv, double seconds) {
    return TraceRecord{iter, observed_loss(system, W), kNan, kNan, min_sv,
                       seconds};
}

class Stopwatch {
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

Matrix soft_threshold(const Matrix& W, double tau) {
    if (tau < 0.0) throw ConfigError("soft_threshold: negative tau");
    ThinSvd svd = thin_svd(W);
    for (Index i = 0; i < svd.s.size(); ++i)
        svd.s(i) = std::max(svd.s(i) - tau, 0.0);
    return svd.U * svd.s.asDiagonal() * svd.V.transpose();
}

void SvtConfig::validate() const {
    if (!(tau > 0.0)) throw ConfigError("SvtConfig: tau must be positive");
    if (!(delta > 0.0)) throw ConfigError("SvtConfig: delta must be positive");
    if (max_iters < 1) throw ConfigError("SvtConfig: max_iters must be >= 1");
    if (record_every < 1) throw ConfigError("SvtConfig: record_every < 1");
}

void SoftImputeConfig::validate() const {
    if (!(lambda > 0.0))
        throw ConfigError("SoftImputeConfig: lambda must be positive");
    if (max_iters < 1)
        throw ConfigError("SoftImputeConfig: max_iters must be >= 1");
    if (record_every < 1) throw ConfigError("SoftImputeConfig: record_every < 1");
}

RunResult run_svt(const ConstraintSystem& system, const SvtConfig& config) {
    config.validate();
    require_mask(system, "run_svt");
    const Stopwatch timer;
    // M restricted to Omega; off-mask entries of Y never become nonzero.
    const Matrix M_omega = system.adjoint_apply(system.targets());

    Matrix Y = Matrix::Zero(system.d(), system.k());
    Matrix W = Matrix::Zero(system.d(), system.k());
    RunResult result;
    result.trace.records.push_back(
        make_record(0, system, W, 0.0, timer.seconds()));

    Index done = 0;
    for (Index t = 1; t <= config.max_iters; ++t) {
        ThinSvd svd = thin_svd(Y);
        double min_shrunk = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < svd.s.size(); ++i) {
            svd.s(i) = std::max(svd.s(i) - config.tau, 0.0);
            min_shrunk = std::min(min_shrunk, svd.s(i));
        }
        W = svd.U * svd.s.asDiagonal() * svd.V.transpose();
        if (!all_finite(W))
            throw DivergenceError("SVT diverged at iteration " +
                                      std::to_string(t),
                                  t);
        // Y update touches observed entries only.
        for (Index q = 0; q < system.num_constraints(); ++q) {
            const auto& [i, j] = system.mask_entries()[q];
            Y(i, j) += config.delta * (M_omega(i, j) - W(i, j));
        }
        done = t;
        if (t % config.record_every == 0 || t == config.max_iters)
            result.trace.records.push_back(
                make_record(t, system, W, min_shrunk, timer.seconds()));
        if (config.time_limit_seconds > 0.0 &&
            timer.seconds() > config.time_limit_seconds)
            break;
    }
    if (result.trace.records.back().iter != done)
        result.trace.records.push_back(make_record(
            done, system, W, min_singular_value(W), timer.seconds()));
    result.W = std::move(W);
    return result;
}

RunResult run_soft_impute(const ConstraintSystem& system,
                          const SoftImputeConfig& config) {
    config.validate();
    require_mask(system, "run_soft_impute");
    const Stopwatch timer;
    const Matrix M_omega = system.adjoint_apply(system.targets());

    Matrix W = Matrix::Zero(system.d(), system.k());
    RunResult result;
    result.trace.records.push_back(
        make_record(0, system, W, 0.0, timer.seconds()));

    Index done = 0;
    for (Index t = 1; t <= config.max_iters; ++t) {
        Matrix Z = W;
        for (const auto& [i, j] : system.mask_entries())
            Z(i, j) = M_omega(i, j);
        ThinSvd svd = thin_svd(Z);
        double min_shrunk = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < svd.s.size(); ++i) {
            svd.s(i) = std::max(svd.s(i) - config.lambda, 0.0);
            min_shrunk = std::min(min_shrunk, svd.s(i));
        }
        W = svd.U * svd.s.asDiagonal() * svd.V.transpose();
        if (!all_finite(W))
            throw DivergenceError("Soft-Impute diverged at iteration " +
                                      std::to_string(t),
                                  t);
        done = t;
        if (t % config.record_every == 0 || t == config.max_iters)
            result.trace.records.push_back(
                make_record(t, system, W, min_shrunk, timer.seconds()));
        if (config.time_limit_seconds > 0.0 &&
            timer.seconds() > config.time_limit_seconds)
            break;
    }
    if (result.trace.records.back().iter != done)
        result.trace.records.push_back(make_record(
            done, system, W, min_singular_value(W), timer.seconds()));
    result.W = std::move(W);
    return result;
}

}  // namespace mirrormc
