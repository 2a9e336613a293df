// Acceptance suite: runs every acceptance criterion end to end and prints
// one pass/fail line per criterion. Expects the path to the mirrormc CLI
// binary as argv[1] (used by the determinism criterion).

#include "mirrormc/baselines.hpp"
#include "mirrormc/experiments.hpp"
#include "mirrormc/linalg.hpp"
#include "mirrormc/smd.hpp"
#include "mirrormc/verification.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace mirrormc;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& title, bool pass,
            const std::string& detail) {
    std::printf("[%s] criterion %d: %s  (%s)\n", pass ? "PASS" : "FAIL", id,
                title.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", x);
    return buf;
}

Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
    std::normal_distribution<double> gauss;
    Matrix M(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) M(i, j) = gauss(rng);
    return M;
}

ConstraintSystem random_mask_system(std::mt19937_64& rng, Index d, Index k,
                                    Index p, const Matrix& M) {
    std::vector<std::pair<Index, Index>> all;
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < k; ++j) all.emplace_back(i, j);
    for (Index i = 0; i < p; ++i) {
        std::uniform_int_distribution<Index> pick(
            i, static_cast<Index>(all.size()) - 1);
        std::swap(all[i], all[pick(rng)]);
    }
    all.resize(p);
    Vector vals(p);
    for (Index q = 0; q < p; ++q) vals(q) = M(all[q].first, all[q].second);
    return ConstraintSystem::from_mask(ObservationMask(all, d, k), vals, d, k);
}

struct MirrorCase {
    std::unique_ptr<MirrorMap> mirror;
    double eta;
    Index deep_iters;
};

std::vector<MirrorCase> shipped_mirrors() {
    std::vector<MirrorCase> grid;
    grid.push_back({std::make_unique<FrobeniusMirror>(1.0), 1.0, 5000});
    grid.push_back({std::make_unique<SchattenMirror>(1.05, 0.0), 0.7, 200000});
    grid.push_back({std::make_unique<SchattenMirror>(1.5, 0.1), 1.0, 20000});
    grid.push_back({std::make_unique<SchattenMirror>(2.0, 0.5), 1.0, 20000});
    grid.push_back({std::make_unique<SchattenMirror>(3.0, 1.0), 5.0, 20000});
    return grid;
}

// 1. Benchmark ordering: mean relative errors under the reference
//    hyperparameters at every sampling probability.
void criterion_1() {
    SweepConfig config;  // defaults are the reference hyperparameters
    config.jobs = 0;
    std::vector<double> probs;
    for (int i = 1; i <= 9; ++i) probs.push_back(0.1 * i);
    const SweepResult result =
        run_sweep(kSweepMethods, probs, {1, 2, 3}, config);

    std::map<std::pair<std::string, double>, std::pair<double, int>> acc;
    for (const SweepCell& cell : result.rows) {
        if (!std::isfinite(cell.rel_error)) continue;
        auto& slot = acc[{cell.method, cell.prob}];
        slot.first += cell.rel_error;
        slot.second += 1;
    }
    bool pass = true;
    double worst_margin = 1e300;
    for (double prob : probs) {
        bool have_all = true;
        double means[3] = {0, 0, 0};
        for (size_t mi = 0; mi < kSweepMethods.size(); ++mi) {
            const auto it = acc.find({kSweepMethods[mi], prob});
            if (it == acc.end() || it->second.second != 3) have_all = false;
            else means[mi] = it->second.first / it->second.second;
        }
        if (!have_all) {
            pass = false;
            break;
        }
        const double smd = means[0], svt = means[1], si = means[2];
        if (!(smd < svt && smd < si)) pass = false;
        worst_margin = std::min({worst_margin, svt - smd, si - smd});
    }
    report(1, "benchmark ordering (schatten_smd < svt, soft_impute at all probs)",
           pass, "worst margin " + fmt(worst_margin));
}

// 2. Frobenius-mirror SMD matches the pseudoinverse min-norm interpolator.
void criterion_2() {
    std::mt19937_64 rng(77);
    const SquaredLoss loss;
    const FrobeniusMirror mirror(1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix M = random_matrix(rng, 8, 6);
        const ConstraintSystem system = random_mask_system(rng, 8, 6, 20, M);
        SolverConfig config;
        config.eta = 1.0;
        config.max_iters = 5000;
        config.stop_tol = 1e-15;
        config.record_every = 5000;
        const Matrix W =
            run(Matrix::Zero(8, 6), mirror, loss, system, config).W;
        const Matrix oracle =
            min_frobenius_interpolator(system, Matrix::Zero(8, 6));
        worst = std::max(worst, (W - oracle).norm() / oracle.norm());
    }
    report(2, "implicit-bias oracle equivalence (10 instances, rel <= 1e-6)",
           worst <= 1e-6, "worst relative error " + fmt(worst));
}

// 3. Structural KKT residual on every recorded iterate; constraint violation
//    at convergence.
void criterion_3() {
    const ConstraintSystem system = generate_instance(6, 5, 1, 0.5, 2).system();
    const SquaredLoss loss;
    const Matrix W0 = Matrix::Zero(6, 5);
    double worst_kkt = 0.0, worst_violation = 0.0, worst_loss = 0.0;
    for (const MirrorCase& mc : shipped_mirrors()) {
        SolverConfig config;
        config.eta = mc.eta;
        config.max_iters = mc.deep_iters;
        config.stop_tol = 1e-14;
        config.record_every = 50;
        const RunResult res = run(W0, *mc.mirror, loss, system, config);
        for (const TraceRecord& rec : res.trace.records)
            worst_kkt = std::max(worst_kkt, rec.kkt_residual);
        worst_loss = std::max(worst_loss, res.trace.records.back().loss);
        worst_violation =
            std::max(worst_violation,
                     (system.apply(res.W) - system.targets()).norm());
    }
    const bool pass =
        worst_kkt <= 1e-8 && worst_loss <= 1e-12 && worst_violation <= 1e-6;
    report(3, "KKT row-space residual and converged constraint violation",
           pass,
           "kkt " + fmt(worst_kkt) + ", loss " + fmt(worst_loss) +
               ", violation " + fmt(worst_violation));
}

// 4. Lemma identity suite: 1000 random triples per mirror config plus live
//    trajectories, residuals <= 1e-8 * scale.
void criterion_4() {
    const ConstraintSystem system = generate_instance(6, 5, 1, 0.5, 2).system();
    const SquaredLoss loss;
    std::mt19937_64 rng(88);
    double worst_three = 0.0, worst_smd = 0.0;
    for (const MirrorCase& mc : shipped_mirrors()) {
        std::vector<Matrix> samples;
        for (int i = 0; i < 10; ++i)
            samples.push_back(random_matrix(rng, 6, 5));
        SolverConfig config;
        config.eta = mc.eta;
        config.max_iters = 100;
        config.batch.scheme = BatchScheme::UniformWithReplacement;
        config.batch.batch_size = 4;
        config.seed = 7;
        const IdentityReport rep =
            check_lemma_identities(*mc.mirror, loss, system, samples, config);
        worst_three = std::max(worst_three, rep.max_three_point_residual);
        worst_smd = std::max(worst_smd, rep.max_smd_identity_residual);
    }
    const bool pass = worst_three <= 1e-8 && worst_smd <= 1e-8;
    report(4, "lemma identities (1000 triples per config + live trajectories)",
           pass,
           "three-point " + fmt(worst_three) + ", smd " + fmt(worst_smd));
}

// 5. Exponential-rate shape on the q=2, nu=0.5 mirror.
void criterion_5() {
    const ConstraintSystem system = generate_instance(6, 5, 1, 0.5, 2).system();
    const SquaredLoss loss;
    const SchattenMirror mirror(2.0, 0.5);
    const Matrix W0 = Matrix::Zero(6, 5);

    SolverConfig deep;
    deep.eta = 1.0;
    deep.max_iters = 30000;
    deep.stop_tol = 1e-16;
    deep.record_every = 30000;
    const Matrix W_star = run(W0, mirror, loss, system, deep).W;

    SolverConfig config;
    config.eta = 1.0;
    config.max_iters = 500;
    const RunTrace trace =
        run(W0, mirror, loss, system, config, &W_star).trace;

    double max_increase = 0.0;
    for (size_t r = 1; r < trace.records.size(); ++r)
        max_increase =
            std::max(max_increase,
                     trace.records[r].bregman - trace.records[r - 1].bregman);
    const RateFit fit = fit_rate(trace, 10);
    const bool pass = fit.r_squared >= 0.95 && max_increase <= 1e-10;
    report(5, "exponential-rate shape (r^2 >= 0.95, monotone divergence)",
           pass,
           "r^2 " + fmt(fit.r_squared) + ", max increase " +
               fmt(max_increase));
}

// 6. Mirror round-trip and finite-difference gradient checks across every
//    shipped configuration, q = 1.05 included.
void criterion_6() {
    std::mt19937_64 rng(99);
    std::vector<std::unique_ptr<MirrorMap>> configs;
    configs.push_back(std::make_unique<FrobeniusMirror>(1.0));
    configs.push_back(std::make_unique<FrobeniusMirror>(2.5));
    for (double q : {1.05, 1.5, 2.0, 3.0})
        for (double nu : {0.0, 0.1, 1.0})
            configs.push_back(std::make_unique<SchattenMirror>(q, nu));
    double worst_round = 0.0, worst_fd = 0.0;
    for (const auto& mirror : configs) {
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix W = random_matrix(rng, 5, 4);
            const Matrix back = mirror->inverse_gradient(mirror->gradient(W));
            worst_round = std::max(worst_round,
                                   (back - W).norm() / (1.0 + W.norm()));
            Matrix E = random_matrix(rng, 5, 4);
            E /= E.norm();
            const double h = 1e-5 * (1.0 + W.norm());
            const double fd =
                (mirror->potential(W + h * E) - mirror->potential(W - h * E)) /
                (2.0 * h);
            const double analytic =
                (mirror->gradient(W).array() * E.array()).sum();
            worst_fd = std::max(worst_fd,
                                std::abs(fd - analytic) /
                                    std::max(1.0, std::abs(analytic)));
        }
    }
    const bool pass = worst_round <= 1e-8 && worst_fd <= 1e-5;
    report(6, "mirror round-trip and finite-difference gradients",
           pass, "round-trip " + fmt(worst_round) + ", fd " + fmt(worst_fd));
}

// 7. Baseline correctness: analytic diagonal soft-threshold, the
//    prox-optimality subgradient inclusion, and hand-unrolled first
//    iterations of SVT and Soft-Impute.
void criterion_7() {
    bool pass = true;
    std::string detail;

    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = 3.0;
    D(1, 1) = 0.5;
    const Matrix S = soft_threshold(D, 1.0);
    Matrix expected = Matrix::Zero(2, 2);
    expected(0, 0) = 2.0;
    if ((S - expected).norm() > 1e-12) {
        pass = false;
        detail += "diagonal case off; ";
    }

    std::mt19937_64 rng(111);
    double worst_sub = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix W = random_matrix(rng, 5, 4);
        const double tau = 0.7;
        const Matrix X = soft_threshold(W, tau);
        const Matrix G = (W - X) / tau;
        Eigen::JacobiSVD<Matrix> svd_G(G);
        worst_sub =
            std::max(worst_sub, svd_G.singularValues().maxCoeff() - 1.0);
        Eigen::JacobiSVD<Matrix> svd_X(
            X, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Vector s = svd_X.singularValues();
        Index rank = 0;
        while (rank < s.size() && s(rank) > 1e-10 * std::max(1.0, s(0)))
            ++rank;
        if (rank == 0) continue;
        const Matrix U1 = svd_X.matrixU().leftCols(rank);
        const Matrix V1 = svd_X.matrixV().leftCols(rank);
        const Matrix core = U1.transpose() * G * V1;
        worst_sub = std::max(
            worst_sub, (core - Matrix::Identity(rank, rank)).norm());
        worst_sub =
            std::max(worst_sub, (U1.transpose() * G - core * V1.transpose()).norm());
        worst_sub = std::max(worst_sub, (G * V1 - U1 * core).norm());
    }
    if (worst_sub > 1e-8) {
        pass = false;
        detail += "subgradient inclusion " + fmt(worst_sub) + "; ";
    }

    // Hand-unrolled first iterations.
    const Matrix M = random_matrix(rng, 5, 5);
    std::vector<std::pair<Index, Index>> cells;
    for (Index i = 0; i < 5; ++i)
        for (Index j = 0; j < 5; ++j)
            if ((i + j) % 2 == 0) cells.emplace_back(i, j);
    Vector vals(static_cast<Index>(cells.size()));
    for (size_t q = 0; q < cells.size(); ++q)
        vals(static_cast<Index>(q)) = M(cells[q].first, cells[q].second);
    const auto system = ConstraintSystem::from_mask(
        ObservationMask(cells, 5, 5), vals, 5, 5);

    SvtConfig svt{2.0, 0.6, 1};
    if (run_svt(system, svt).W.norm() != 0.0) {  // W_1 = S_tau(0) = 0 exactly
        pass = false;
        detail += "svt first step; ";
    }
    SvtConfig svt2{2.0, 0.6, 2};
    const Matrix W2 = run_svt(system, svt2).W;
    Matrix Y1 = Matrix::Zero(5, 5);
    for (const auto& [i, j] : cells) Y1(i, j) = 0.6 * M(i, j);
    if ((W2 - soft_threshold(Y1, 2.0)).norm() > 1e-12) {
        pass = false;
        detail += "svt second step; ";
    }

    SoftImputeConfig si{0.4, 1};
    const Matrix Wsi = run_soft_impute(system, si).W;
    Matrix Z0 = Matrix::Zero(5, 5);
    for (const auto& [i, j] : cells) Z0(i, j) = M(i, j);
    if ((Wsi - soft_threshold(Z0, 0.4)).norm() > 1e-12) {
        pass = false;
        detail += "soft-impute first step; ";
    }

    if (detail.empty()) detail = "all subchecks clean";
    report(7, "baseline correctness (prox, SVT, Soft-Impute)", pass, detail);
}

// 8. CLI determinism: repeated invocations produce byte-identical CSVs.
void criterion_8(const std::string& cli) {
    if (cli.empty()) {
        report(8, "CLI determinism", false, "no CLI path supplied");
        return;
    }
    const fs::path tmp = fs::temp_directory_path() / "mirrormc_acceptance";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    const auto shell = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };
    const auto slurp = [](const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    bool pass = true;
    std::string detail;
    const std::string gen =
        "generate --n 20 --m 16 --rank 2 --prob 0.6 --seed 13 --out ";
    if (shell(gen + (tmp / "g1").string()) != 0 ||
        shell(gen + (tmp / "g2").string()) != 0)
        pass = false;
    if (slurp(tmp / "g1" / "M_true.csv") != slurp(tmp / "g2" / "M_true.csv") ||
        slurp(tmp / "g1" / "mask.csv") != slurp(tmp / "g2" / "mask.csv")) {
        pass = false;
        detail += "generate differs; ";
    }

    const std::string run_args =
        "run --method smd --instance " + (tmp / "g1").string() + " --out ";
    if (shell(run_args + (tmp / "r1").string()) != 0 ||
        shell(run_args + (tmp / "r2").string()) != 0)
        pass = false;
    if (slurp(tmp / "r1" / "trace.csv") != slurp(tmp / "r2" / "trace.csv") ||
        slurp(tmp / "r1" / "solution.csv") !=
            slurp(tmp / "r2" / "solution.csv")) {
        pass = false;
        detail += "run differs; ";
    }

    const std::string bench_args =
        "bench --probs 0.5,0.9 --seeds 1,2 --n 16 --m 16 --rank 2 --iters 50 "
        "--eta 2.0 --jobs 2 --out ";
    if (shell(bench_args + (tmp / "b1").string()) != 0 ||
        shell(bench_args + (tmp / "b2").string()) != 0)
        pass = false;
    if (slurp(tmp / "b1" / "sweep.csv") != slurp(tmp / "b2" / "sweep.csv") ||
        slurp(tmp / "b1" / "sweep.svg") != slurp(tmp / "b2" / "sweep.svg")) {
        pass = false;
        detail += "bench differs; ";
    }

    fs::remove_all(tmp);
    if (detail.empty()) detail = "generate/run/bench byte-identical";
    report(8, "CLI determinism", pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8(cli);
    criterion_1();  // the long sweep last, so quick failures surface first
    if (g_failures > 0) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
