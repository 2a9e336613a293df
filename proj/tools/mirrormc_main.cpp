#include "mirrormc/baselines.hpp"
#include "mirrormc/config.hpp"
#include "mirrormc/experiments.hpp"
#include "mirrormc/io.hpp"
#include "mirrormc/smd.hpp"
#include "mirrormc/verification.hpp"
#include "mirrormc/verify_suites.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mirrormc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitVerifyFailed = 3;

// "0.1:0.9:0.1" ranges or "0.1,0.5,0.9" lists.
std::vector<double> parse_probs(const std::string& text) {
    std::vector<double> probs;
    if (text.find(':') != std::string::npos) {
        double start, stop, step;
        if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 ||
            step <= 0.0)
            throw ConfigError("--probs range must be start:stop:step");
        for (double p = start; p <= stop + 1e-12; p += step) {
            // Snap accumulated rounding so 0.1*3 prints as 0.3 in the CSV.
            const double snapped = std::round(p * 1e12) / 1e12;
            probs.push_back(std::min(snapped, 1.0));
        }
        return probs;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) probs.push_back(std::stod(item));
    return probs;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) seeds.push_back(std::stoull(item));
    return seeds;
}

std::vector<std::string> parse_methods(const std::string& text) {
    std::vector<std::string> methods;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) methods.push_back(item);
    return methods;
}

int cmd_generate(Index n, Index m, Index rank, double prob, std::uint64_t seed,
                 const fs::path& out) {
    const ProblemInstance inst = generate_instance(n, m, rank, prob, seed);
    fs::create_directories(out);
    write_matrix_csv(out / "M_true.csv", inst.M_true);
    write_mask_csv(out / "mask.csv", inst.mask, inst.observed);
    std::cout << "wrote " << (out / "M_true.csv").string() << " and "
              << (out / "mask.csv").string() << " (" << inst.mask.size()
              << " observed entries)\n";
    return kExitOk;
}

int cmd_run(const std::string& method, const std::string& config_path,
            const fs::path& instance_dir, const fs::path& out,
            bool with_timings) {
    const Matrix M = read_matrix_csv(instance_dir / "M_true.csv");
    const MaskData data =
        read_mask_csv(instance_dir / "mask.csv", M.rows(), M.cols());
    const ConstraintSystem system = ConstraintSystem::from_mask(
        data.mask, data.observed, M.rows(), M.cols());

    json spec = json::object();
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot read config " + config_path);
        try {
            in >> spec;
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config parse: ") + e.what());
        }
    }
    RunRecipe recipe = parse_run_config(spec, M.rows(), M.cols());
    if (const char* env_seed = std::getenv("MIRROR_MC_SEED")) {
        recipe.solver.seed = std::stoull(env_seed);
        std::cerr << "seed overridden by MIRROR_MC_SEED="
                  << recipe.solver.seed << "\n";
    }

    RunResult result;
    if (method == "smd") {
        result = run(Matrix::Zero(M.rows(), M.cols()), *recipe.mirror,
                     *recipe.loss, system, recipe.solver);
    } else if (method == "svt") {
        recipe.svt.record_every = recipe.solver.record_every;
        result = run_svt(system, recipe.svt);
    } else if (method == "softimpute") {
        recipe.soft_impute.record_every = recipe.solver.record_every;
        result = run_soft_impute(system, recipe.soft_impute);
    } else {
        throw ConfigError("unknown method '" + method + "'");
    }

    fs::create_directories(out);
    write_trace_csv(out / "trace.csv", result.trace, with_timings);
    write_matrix_csv(out / "solution.csv", result.W);
    std::cout << "method " << method << ": final loss "
              << format_full(result.trace.records.back().loss)
              << ", relative error "
              << format_full(relative_error(result.W, M)) << "\n";
    return kExitOk;
}

int cmd_bench(const std::string& probs_text, const std::string& seeds_text,
              const std::string& methods_text, const fs::path& out,
              SweepConfig config, bool log_y, bool with_timings) {
    const std::vector<double> probs = parse_probs(probs_text);
    const std::vector<std::uint64_t> seeds = parse_seeds(seeds_text);
    const std::vector<std::string> methods = parse_methods(methods_text);

    const SweepResult result = run_sweep(methods, probs, seeds, config);
    fs::create_directories(out);
    emit_csv(result, out / "sweep.csv", with_timings);
    emit_svg_plot(result, out / "sweep.svg", log_y);

    bool all_methods_ok = true;
    for (const std::string& method : methods) {
        int succeeded = 0;
        for (const SweepCell& cell : result.rows)
            if (cell.method == method && std::isfinite(cell.rel_error))
                ++succeeded;
        if (succeeded == 0) all_methods_ok = false;
        std::cout << method << ": " << succeeded << " cells ok\n";
    }
    for (const SweepCell& cell : result.rows)
        if (!cell.error.empty())
            std::cerr << "cell (" << cell.method << ", p=" << cell.prob
                      << ", seed=" << cell.seed << ") failed: " << cell.error
                      << "\n";
    std::cout << "wrote " << (out / "sweep.csv").string() << " and "
              << (out / "sweep.svg").string() << "\n";
    return all_methods_ok ? kExitOk : kExitDivergence;
}

int cmd_verify(const std::string& suite, const std::string& report_path,
               double tolerance_scale) {
    const std::vector<CheckRow> rows = run_verify_suite(suite, tolerance_scale);
    json checks = json::array();
    bool all_pass = true;
    for (const CheckRow& row : rows) {
        std::cout << (row.pass ? "[PASS] " : "[FAIL] ") << row.check_name
                  << "  residual " << format_full(row.residual)
                  << "  threshold " << format_full(row.threshold) << "\n";
        checks.push_back({{"check_name", row.check_name},
                          {"residual", row.residual},
                          {"threshold", row.threshold},
                          {"pass", row.pass}});
        all_pass = all_pass && row.pass;
    }
    const json report = {{"suite", suite},
                         {"tolerance_scale", tolerance_scale},
                         {"pass", all_pass},
                         {"checks", checks}};
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) throw IoError("cannot write " + report_path);
        out << report.dump(2) << "\n";
    }
    std::cout << (all_pass ? "all checks passed" : "some checks FAILED")
              << "\n";
    return all_pass ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Matrix stochastic mirror descent solvers and the completion "
        "benchmark harness"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand(
        "generate", "Write a low-rank instance (M_true.csv, mask.csv)");
    Index g_n = 100, g_m = 100, g_rank = 5;
    double g_prob = 0.5;
    std::uint64_t g_seed = 1;
    std::string g_out = "instance";
    generate->add_option("--n", g_n, "rows");
    generate->add_option("--m", g_m, "columns");
    generate->add_option("--rank", g_rank, "target rank");
    generate->add_option("--prob", g_prob, "observation probability");
    generate->add_option("--seed", g_seed, "rng seed");
    generate->add_option("--out", g_out, "output directory")->required();

    // run
    auto* run_cmd = app.add_subcommand(
        "run", "Solve one instance (trace.csv, solution.csv)");
    std::string r_method, r_config, r_instance, r_out = "result";
    bool r_timings = false;
    run_cmd->add_option("--method", r_method, "smd | svt | softimpute")
        ->required();
    run_cmd->add_option("--config", r_config, "JSON config file");
    run_cmd->add_option("--instance", r_instance, "instance directory")
        ->required();
    run_cmd->add_option("--out", r_out, "output directory");
    run_cmd->add_flag("--timings", r_timings,
                      "keep wall-clock seconds in the trace (not reproducible)");

    // bench
    auto* bench = app.add_subcommand(
        "bench", "Sweep methods over sampling probabilities (sweep.csv/.svg)");
    std::string b_probs = "0.1:0.9:0.1", b_seeds = "1,2,3";
    std::string b_methods = "schatten_smd,svt,soft_impute";
    std::string b_out = "bench";
    SweepConfig b_config;
    bool b_log_y = false, b_timings = false;
    bench->add_option("--probs", b_probs, "start:stop:step or comma list");
    bench->add_option("--seeds", b_seeds, "comma separated seeds");
    bench->add_option("--methods", b_methods, "comma separated methods");
    bench->add_option("--out", b_out, "output directory");
    bench->add_option("--n", b_config.n, "rows");
    bench->add_option("--m", b_config.m, "columns");
    bench->add_option("--rank", b_config.rank, "target rank");
    bench->add_option("--iters", b_config.iters, "iterations per cell");
    bench->add_option("--eta", b_config.smd_eta, "SMD step size");
    bench->add_option("--jobs", b_config.jobs,
                      "parallel cells (0 = logical cores)");
    bench->add_flag("--log-y", b_log_y, "log scale on the error axis");
    bench->add_flag("--timings", b_timings,
                    "keep wall-clock seconds in the CSV (not reproducible)");

    // verify
    auto* verify = app.add_subcommand(
        "verify", "Run the built-in verification checks");
    std::string v_suite = "all", v_out;
    double v_scale = 1.0;
    verify->add_option("--suite", v_suite, "identities | bias | rate | all");
    verify->add_option("--out", v_out, "JSON report path");
    verify->add_option("--tolerance-scale", v_scale,
                       "multiply every threshold (debugging aid)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
            return app.exit(e);
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (generate->parsed())
            return cmd_generate(g_n, g_m, g_rank, g_prob, g_seed, g_out);
        if (run_cmd->parsed())
            return cmd_run(r_method, r_config, r_instance, r_out, r_timings);
        if (bench->parsed())
            return cmd_bench(b_probs, b_seeds, b_methods, b_out, b_config,
                             b_log_y, b_timings);
        if (verify->parsed()) return cmd_verify(v_suite, v_out, v_scale);
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
