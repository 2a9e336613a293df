#include "mirrormc/verify_suites.hpp"

#include "mirrormc/experiments.hpp"
#include "mirrormc/verification.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

namespace mirrormc {

namespace {

struct MirrorUnderTest {
    std::unique_ptr<MirrorMap> mirror;
    double eta;            // step size that converges on the 6x5 instance
    Index deep_iters;      // budget for the driven-to-convergence runs
};

std::vector<MirrorUnderTest> mirror_grid() {
    std::vector<MirrorUnderTest> grid;
    grid.push_back({std::make_unique<FrobeniusMirror>(1.0), 1.0, 5000});
    // The q-near-1 mirror has vanishing curvature along small singular
    // directions, so its deep tail converges sublinearly; give it room.
    grid.push_back({std::make_unique<SchattenMirror>(1.05, 0.0), 0.7, 200000});
    grid.push_back({std::make_unique<SchattenMirror>(1.5, 0.1), 1.0, 10000});
    grid.push_back({std::make_unique<SchattenMirror>(2.0, 0.5), 1.0, 10000});
    grid.push_back({std::make_unique<SchattenMirror>(3.0, 1.0), 5.0, 10000});
    return grid;
}

// Built-in completion instance shared by the suites: 6x5, rank 1, about half
// the entries observed.
ConstraintSystem builtin_system() {
    return generate_instance(6, 5, 1, 0.5, 2).system();
}

Matrix random_point(std::mt19937_64& rng, Index d, Index k) {
    std::normal_distribution<double> gauss;
    Matrix M(d, k);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < k; ++j) M(i, j) = gauss(rng);
    return M;
}

void add_identity_checks(std::vector<CheckRow>& rows, double scale) {
    const ConstraintSystem system = builtin_system();
    const SquaredLoss loss;
    std::mt19937_64 rng(1001);
    for (const auto& cfg : mirror_grid()) {
        const MirrorMap& mirror = *cfg.mirror;
        const std::string tag = "/" + mirror.describe();

        std::vector<Matrix> samples;
        for (int i = 0; i < 5; ++i)
            samples.push_back(random_point(rng, 6, 5));
        SolverConfig sc;
        sc.eta = cfg.eta;
        sc.max_iters = 60;
        sc.batch.scheme = BatchScheme::UniformWithReplacement;
        sc.batch.batch_size = 3;
        sc.seed = 5;
        const IdentityReport report =
            check_lemma_identities(mirror, loss, system, samples, sc);
        rows.push_back({"three_point" + tag, report.max_three_point_residual,
                        1e-8 * scale,
                        report.max_three_point_residual <= 1e-8 * scale});
        rows.push_back({"smd_identity" + tag, report.max_smd_identity_residual,
                        1e-8 * scale,
                        report.max_smd_identity_residual <= 1e-8 * scale});

        double round_trip = 0.0, grad_fd = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix W = random_point(rng, 6, 5);
            const Matrix back = mirror.inverse_gradient(mirror.gradient(W));
            round_trip = std::max(round_trip,
                                  (back - W).norm() / (1.0 + W.norm()));
            Matrix E = random_point(rng, 6, 5);
            E /= E.norm();
            const double h = 1e-5 * (1.0 + W.norm());
            const double fd =
                (mirror.potential(W + h * E) - mirror.potential(W - h * E)) /
                (2.0 * h);
            const double analytic =
                (mirror.gradient(W).array() * E.array()).sum();
            grad_fd = std::max(grad_fd, std::abs(fd - analytic) /
                                            std::max(1.0, std::abs(analytic)));
        }
        rows.push_back({"dual_round_trip" + tag, round_trip, 1e-8 * scale,
                        round_trip <= 1e-8 * scale});
        rows.push_back({"gradient_fd" + tag, grad_fd, 1e-5 * scale,
                        grad_fd <= 1e-5 * scale});
    }
}

void add_bias_checks(std::vector<CheckRow>& rows, double scale) {
    const SquaredLoss loss;
    std::mt19937_64 rng(1002);

    // Frobenius-mirror output against the pseudoinverse interpolator.
    double equiv = 0.0;
    for (std::uint64_t seed : {11, 12, 13}) {
        const ProblemInstance inst = generate_instance(8, 6, 2, 0.42, seed);
        const ConstraintSystem system = inst.system();
        const FrobeniusMirror mirror(1.0);
        SolverConfig sc;
        sc.eta = 1.0;
        sc.max_iters = 5000;
        sc.stop_tol = 1e-15;
        sc.record_every = 5000;
        const Matrix W =
            run(Matrix::Zero(8, 6), mirror, loss, system, sc).W;
        const Matrix oracle =
            min_frobenius_interpolator(system, Matrix::Zero(8, 6));
        equiv = std::max(equiv, (W - oracle).norm() / oracle.norm());
    }
    rows.push_back({"frobenius_equivalence", equiv, 1e-6 * scale,
                    equiv <= 1e-6 * scale});

    // Local optimality of the converged Bregman divergence for a general
    // mirror, certified against feasible perturbations.
    {
        const ConstraintSystem system = builtin_system();
        const SchattenMirror mirror(1.5, 0.5);
        const Matrix W0 = Matrix::Zero(6, 5);
        SolverConfig sc;
        sc.eta = 1.0;
        sc.max_iters = 20000;
        sc.stop_tol = 1e-15;
        sc.record_every = 20000;
        const Matrix W = run(W0, mirror, loss, system, sc).W;
        const double base = bregman(mirror, W, W0);
        double excess = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const Matrix D = random_point(rng, 6, 5);
            const Matrix P_perp = system.project_row_space(D).P_perp;
            const double t = 0.01 + 0.02 * (trial % 10);
            excess = std::max(
                excess, (base - bregman(mirror, W + t * P_perp, W0)) /
                            std::max(1.0, base));
        }
        rows.push_back({"bregman_local_optimality", excess, 1e-6 * scale,
                        excess <= 1e-6 * scale});
    }

    // Structural KKT residual along traces, and the constraint violation at
    // convergence, across the mirror grid.
    {
        const ConstraintSystem system = builtin_system();
        const Matrix W0 = Matrix::Zero(6, 5);
        double worst_kkt = 0.0, worst_violation = 0.0, worst_loss = 0.0;
        for (const auto& cfg : mirror_grid()) {
            SolverConfig sc;
            sc.eta = cfg.eta;
            sc.max_iters = cfg.deep_iters;
            sc.stop_tol = 1e-14;
            sc.record_every = 50;
            const RunResult res = run(W0, *cfg.mirror, loss, system, sc);
            for (const auto& rec : res.trace.records)
                worst_kkt = std::max(worst_kkt, rec.kkt_residual);
            worst_loss = std::max(worst_loss, res.trace.records.back().loss);
            worst_violation = std::max(
                worst_violation,
                (system.apply(res.W) - system.targets()).norm());
        }
        rows.push_back({"kkt_row_space", worst_kkt, 1e-8 * scale,
                        worst_kkt <= 1e-8 * scale});
        rows.push_back({"converged_loss", worst_loss, 1e-12 * scale,
                        worst_loss <= 1e-12 * scale});
        rows.push_back({"constraint_violation", worst_violation, 1e-6 * scale,
                        worst_violation <= 1e-6 * scale});
    }
}

void add_rate_checks(std::vector<CheckRow>& rows, double scale) {
    const SquaredLoss loss;
    const ConstraintSystem system = builtin_system();
    const SchattenMirror mirror(2.0, 0.5);
    const Matrix W0 = Matrix::Zero(6, 5);

    SolverConfig deep;
    deep.eta = 1.0;
    deep.max_iters = 30000;
    deep.stop_tol = 1e-16;
    deep.record_every = 30000;
    const Matrix W_star = run(W0, mirror, loss, system, deep).W;

    SolverConfig sc;
    sc.eta = 1.0;
    sc.max_iters = 500;
    const RunTrace trace = run(W0, mirror, loss, system, sc, &W_star).trace;

    double max_increase = 0.0;
    for (size_t r = 1; r < trace.records.size(); ++r)
        max_increase = std::max(
            max_increase, trace.records[r].bregman - trace.records[r - 1].bregman);
    rows.push_back({"divergence_monotone", max_increase, 1e-10 * scale,
                    max_increase <= 1e-10 * scale});

    // psi = 1.5 ||.||_F^2 on this config, so L = 1.5 exactly.
    TheoreticalRate theory{sc.eta, 1.0, system.min_singular_value(), 1.5,
                           system.num_constraints()};
    const RateFit fit = fit_rate(trace, 10, theory);
    rows.push_back({"rate_r_squared", 1.0 - fit.r_squared, 0.05 * scale,
                    1.0 - fit.r_squared <= 0.05 * scale});
    const double slope_gap = fit.slope - std::log(*fit.theoretical_factor);
    rows.push_back({"rate_slope_bound", slope_gap, 1e-12 * scale,
                    slope_gap <= 1e-12 * scale});
}

}  // namespace

std::vector<CheckRow> run_verify_suite(const std::string& suite,
                                       double tolerance_scale) {
    if (!(tolerance_scale >= 0.0))
        throw ConfigError("verify: tolerance scale must be nonnegative");
    std::vector<CheckRow> rows;
    if (suite == "identities") {
        add_identity_checks(rows, tolerance_scale);
    } else if (suite == "bias") {
        add_bias_checks(rows, tolerance_scale);
    } else if (suite == "rate") {
        add_rate_checks(rows, tolerance_scale);
    } else if (suite == "all") {
        add_identity_checks(rows, tolerance_scale);
        add_bias_checks(rows, tolerance_scale);
        add_rate_checks(rows, tolerance_scale);
    } else {
        throw ConfigError("verify: unknown suite '" + suite + "'");
    }
    return rows;
}

}  // namespace mirrormc
