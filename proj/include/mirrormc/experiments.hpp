#pragma once

#include "mirrormc/operators.hpp"
#include "mirrormc/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mirrormc {

/// Rank-r ground truth with a Bernoulli(prob) observation mask.
struct ProblemInstance {
    Matrix M_true;
    ObservationMask mask;
    Vector observed;  // values at mask entries, in mask order
    Index rank;
    double prob;
    std::uint64_t seed;

    ConstraintSystem system() const;
};

/// M = U V^T with Gaussian factors scaled by 1/sqrt(r) and the product by a
/// further 1/sqrt(r), so entries have second moment 1/r^2. Entries enter the
/// mask by independent Bernoulli(prob) draws in row-major order; an empty
/// draw is retried once with a bumped sub-seed before giving up.
/// Deterministic per seed.
ProblemInstance generate_instance(Index n, Index m, Index rank, double prob,
                                  std::uint64_t seed);

/// ||W - M||_F / ||M||_F.
double relative_error(const Matrix& W, const Matrix& M_true);

struct SweepCell {
    std::string method;
    double prob;
    std::uint64_t seed;
    double rel_error;  // NaN marks a failed cell
    Index iters;
    double seconds;
    std::string error;  // in-memory failure tag, empty on success
};

struct SweepResult {
    std::vector<SweepCell> rows;
};

/// Benchmark hyperparameters. Defaults reproduce the reference comparison:
/// Schatten q = 1.05 mirror with eta = 50 and the full-batch gradient
/// normalized by the observation count, SVT with tau = 5 max(n, m) and
/// delta = 0.8, Soft-Impute with lambda = 1.0, 200 iterations each.
struct SweepConfig {
    Index n = 100, m = 100, rank = 5;
    Index iters = 200;
    double smd_exponent = 1.05;
    double smd_eta = 50.0;
    double svt_tau = 0.0;  // 0 means 5 * max(n, m)
    double svt_delta = 0.8;
    double soft_impute_lambda = 1.0;
    int jobs = 0;  // 0 means hardware concurrency
    double cell_time_limit_seconds = 120.0;
};

inline const std::vector<std::string> kSweepMethods = {"schatten_smd", "svt",
                                                       "soft_impute"};

/// One row per (method, prob, seed), cells evaluated in parallel but merged
/// in deterministic order. Failed cells become NaN rows tagged with the
/// error; the sweep keeps going.
SweepResult run_sweep(const std::vector<std::string>& methods,
                      const std::vector<double>& probs,
                      const std::vector<std::uint64_t>& seeds,
                      const SweepConfig& config = {});

/// Header method,prob,seed,rel_error,iters,seconds. Values round-trip
/// exactly; seconds are zeroed unless with_timings keeps them.
void emit_csv(const SweepResult& result, const std::filesystem::path& path,
              bool with_timings = false);
SweepResult read_sweep_csv(const std::filesystem::path& path);

/// Line chart of mean relative error across seeds versus sampling
/// probability, one polyline per method.
void emit_svg_plot(const SweepResult& result, const std::filesystem::path& path,
                   bool log_y = false);

}  // namespace mirrormc
