#include "mirrormc/experiments.hpp"

#include "mirrormc/baselines.hpp"
#include "mirrormc/io.hpp"
#include "mirrormc/smd.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace mirrormc {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

ConstraintSystem ProblemInstance::system() const {
    return ConstraintSystem::from_mask(mask, observed, M_true.rows(),
                                       M_true.cols());
}

namespace {

std::vector<std::pair<Index, Index>> draw_mask(std::mt19937_64& rng, Index n,
                                               Index m, double prob) {
    std::bernoulli_distribution keep(prob);
    std::vector<std::pair<Index, Index>> entries;
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < m; ++j)
            if (keep(rng)) entries.emplace_back(i, j);
    return entries;
}

}  // namespace

ProblemInstance generate_instance(Index n, Index m, Index rank, double prob,
                                  std::uint64_t seed) {
    if (rank < 1 || rank > std::min(n, m))
        throw ConfigError("generate_instance: rank outside [1, min(n, m)]");
    if (!(prob > 0.0 && prob <= 1.0))
        throw ConfigError("generate_instance: prob outside (0, 1]");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Matrix U(n, rank), V(m, rank);
    for (Index i = 0; i < n; ++i)
        for (Index l = 0; l < rank; ++l) U(i, l) = gauss(rng);
    for (Index j = 0; j < m; ++j)
        for (Index l = 0; l < rank; ++l) V(j, l) = gauss(rng);
    // Each factor carries a 1/sqrt(r) scaling and the product one more, so
    // entries of M have second moment 1/r^2. This is the scale at which the
    // reference hyperparameters (eta = 50 with the |Omega|-normalized
    // gradient, tau = 5 max(n, m), lambda = 1) operate in their intended
    // regime; see the README on data generation.
    Matrix M = U * V.transpose() /
               (static_cast<double>(rank) * std::sqrt(static_cast<double>(rank)));

    auto entries = draw_mask(rng, n, m, prob);
    if (entries.empty()) {
        std::mt19937_64 retry(seed + 1);
        entries = draw_mask(retry, n, m, prob);
    }
    if (entries.empty())
        throw NumericalError("generate_instance: drew an empty mask twice");

    Vector observed(static_cast<Index>(entries.size()));
    for (size_t q = 0; q < entries.size(); ++q)
        observed(static_cast<Index>(q)) =
            M(entries[q].first, entries[q].second);

    return ProblemInstance{std::move(M),
                           ObservationMask(std::move(entries), n, m),
                           std::move(observed), rank, prob, seed};
}

double relative_error(const Matrix& W, const Matrix& M_true) {
    if (W.rows() != M_true.rows() || W.cols() != M_true.cols())
        throw DimensionError("relative_error: shape mismatch");
    const double denom = M_true.norm();
    if (denom == 0.0)
        throw ConfigError("relative_error: reference matrix is zero");
    return (W - M_true).norm() / denom;
}

namespace {

SweepCell run_cell(const std::string& method, double prob, std::uint64_t seed,
                   const SweepConfig& config) {
    SweepCell cell{method, prob, seed, kNan, 0, 0.0, {}};
    const auto start = std::chrono::steady_clock::now();
    try {
        const ProblemInstance inst =
            generate_instance(config.n, config.m, config.rank, prob, seed);
        const ConstraintSystem system = inst.system();
        Matrix W;
        Index iters_done = 0;
        if (method == "schatten_smd") {
            const SchattenMirror mirror(config.smd_exponent, 0.0);
            const SquaredLoss loss;
            SolverConfig sc;
            sc.eta = config.smd_eta;
            sc.max_iters = config.iters;
            sc.batch.scheme = BatchScheme::Full;
            sc.seed = seed;
            sc.record_every = config.iters;
            sc.time_limit_seconds = config.cell_time_limit_seconds;
            RunResult res = run(Matrix::Zero(config.n, config.m), mirror, loss,
                                system, sc);
            iters_done = res.trace.records.back().iter;
            W = std::move(res.W);
        } else if (method == "svt") {
            SvtConfig sc;
            sc.tau = config.svt_tau > 0.0
                         ? config.svt_tau
                         : 5.0 * static_cast<double>(std::max(config.n, config.m));
            sc.delta = config.svt_delta;
            sc.max_iters = config.iters;
            sc.record_every = config.iters;
            sc.time_limit_seconds = config.cell_time_limit_seconds;
            RunResult res = run_svt(system, sc);
            iters_done = res.trace.records.back().iter;
            W = std::move(res.W);
        } else {  // soft_impute, validated upstream
            SoftImputeConfig sc;
            sc.lambda = config.soft_impute_lambda;
            sc.max_iters = config.iters;
            sc.record_every = config.iters;
            sc.time_limit_seconds = config.cell_time_limit_seconds;
            RunResult res = run_soft_impute(system, sc);
            iters_done = res.trace.records.back().iter;
            W = std::move(res.W);
        }
        cell.rel_error = relative_error(W, inst.M_true);
        cell.iters = iters_done;
        if (iters_done < config.iters) cell.error = "time_limit";
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    cell.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return cell;
}

}  // namespace

SweepResult run_sweep(const std::vector<std::string>& methods,
                      const std::vector<double>& probs,
                      const std::vector<std::uint64_t>& seeds,
                      const SweepConfig& config) {
    if (methods.empty() || probs.empty() || seeds.empty())
        throw ConfigError("run_sweep: methods, probs, and seeds must be nonempty");
    for (const std::string& method : methods)
        if (std::find(kSweepMethods.begin(), kSweepMethods.end(), method) ==
            kSweepMethods.end())
            throw ConfigError("run_sweep: unknown method '" + method + "'");

    struct Spec {
        const std::string* method;
        double prob;
        std::uint64_t seed;
    };
    std::vector<Spec> cells;
    for (const std::string& method : methods)
        for (double prob : probs)
            for (std::uint64_t seed : seeds) cells.push_back({&method, prob, seed});

    SweepResult result;
    result.rows.resize(cells.size());

    unsigned jobs = config.jobs > 0 ? static_cast<unsigned>(config.jobs)
                                    : std::thread::hardware_concurrency();
    jobs = std::max(1u, std::min<unsigned>(jobs, cells.size()));

    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t idx = next.fetch_add(1); idx < cells.size();
             idx = next.fetch_add(1)) {
            const Spec& spec = cells[idx];
            result.rows[idx] =
                run_cell(*spec.method, spec.prob, spec.seed, config);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return result;
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path,
              bool with_timings) {
    if (result.rows.empty()) throw ConfigError("emit_csv: empty sweep result");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "method,prob,seed,rel_error,iters,seconds\n";
    for (const SweepCell& cell : result.rows) {
        out << cell.method << ',' << format_full(cell.prob) << ',' << cell.seed
            << ',' << format_full(cell.rel_error) << ',' << cell.iters << ','
            << format_full(with_timings ? cell.seconds : 0.0) << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

SweepResult read_sweep_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) ||
        line.rfind("method,prob,seed,rel_error,iters,seconds", 0) != 0)
        throw IoError(path.string() + ": missing sweep header");
    SweepResult result;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        SweepCell cell;
        std::string field;
        std::getline(ss, cell.method, ',');
        std::getline(ss, field, ',');
        cell.prob = std::stod(field);
        std::getline(ss, field, ',');
        cell.seed = std::stoull(field);
        std::getline(ss, field, ',');
        cell.rel_error = std::stod(field);
        std::getline(ss, field, ',');
        cell.iters = std::stoll(field);
        std::getline(ss, field, ',');
        cell.seconds = std::stod(field);
        result.rows.push_back(std::move(cell));
    }
    return result;
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double x) {
    std::ostringstream ss;
    ss.precision(6);
    ss << x;
    return ss.str();
}

}  // namespace

void emit_svg_plot(const SweepResult& result,
                   const std::filesystem::path& path, bool log_y) {
    if (result.rows.empty())
        throw ConfigError("emit_svg_plot: empty sweep result");

    // Mean across seeds, per (method, prob), in first-appearance order.
    std::vector<std::string> methods;
    for (const SweepCell& cell : result.rows)
        if (std::find(methods.begin(), methods.end(), cell.method) ==
            methods.end())
            methods.push_back(cell.method);

    struct Point {
        double prob;
        double mean;
    };
    std::vector<std::vector<Point>> curves(methods.size());
    for (size_t mi = 0; mi < methods.size(); ++mi) {
        std::vector<double> probs;
        for (const SweepCell& cell : result.rows)
            if (cell.method == methods[mi] &&
                std::find(probs.begin(), probs.end(), cell.prob) == probs.end())
                probs.push_back(cell.prob);
        std::sort(probs.begin(), probs.end());
        for (double prob : probs) {
            double sum = 0.0;
            int count = 0;
            for (const SweepCell& cell : result.rows)
                if (cell.method == methods[mi] && cell.prob == prob &&
                    std::isfinite(cell.rel_error)) {
                    sum += cell.rel_error;
                    ++count;
                }
            if (count > 0) curves[mi].push_back({prob, sum / count});
        }
    }

    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = std::numeric_limits<double>::infinity(), y_max = 0.0;
    for (const auto& curve : curves)
        for (const Point& pt : curve) {
            x_min = std::min(x_min, pt.prob);
            x_max = std::max(x_max, pt.prob);
            y_min = std::min(y_min, pt.mean);
            y_max = std::max(y_max, pt.mean);
        }
    if (!std::isfinite(x_min))
        throw ConfigError("emit_svg_plot: no finite data points");
    if (x_max == x_min) {
        x_min -= 0.05;
        x_max += 0.05;
    }
    if (log_y) {
        y_min = y_min > 0.0 ? y_min : 1e-16;
        if (y_max <= y_min) y_max = y_min * 10.0;
    } else {
        y_min = 0.0;
        if (y_max <= 0.0) y_max = 1.0;
        y_max *= 1.05;
    }

    const double width = 720, height = 480;
    const double left = 80, right = 560, top = 40, bottom = 420;
    const auto sx = [&](double p) {
        return left + (p - x_min) / (x_max - x_min) * (right - left);
    };
    const auto sy = [&](double e) {
        const double f = log_y
                             ? (std::log10(e) - std::log10(y_min)) /
                                   (std::log10(y_max) - std::log10(y_min))
                             : (e - y_min) / (y_max - y_min);
        return bottom - f * (bottom - top);
    };

    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
        << height << "\">\n";
    out << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\""
        << height << "\" fill=\"white\"/>\n";
    out << "  <line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\""
        << right << "\" y2=\"" << bottom
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "  <line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
        << "\" y2=\"" << bottom << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    const int x_ticks = 5, y_ticks = 5;
    for (int i = 0; i <= x_ticks; ++i) {
        const double p = x_min + (x_max - x_min) * i / x_ticks;
        out << "  <line x1=\"" << num(sx(p)) << "\" y1=\"" << bottom
            << "\" x2=\"" << num(sx(p)) << "\" y2=\"" << bottom + 5
            << "\" stroke=\"black\"/>\n";
        out << "  <text x=\"" << num(sx(p)) << "\" y=\"" << bottom + 20
            << "\" font-size=\"12\" text-anchor=\"middle\">" << num(p)
            << "</text>\n";
    }
    for (int i = 0; i <= y_ticks; ++i) {
        const double e =
            log_y ? std::pow(10.0, std::log10(y_min) +
                                       (std::log10(y_max) - std::log10(y_min)) *
                                           i / y_ticks)
                  : y_min + (y_max - y_min) * i / y_ticks;
        out << "  <line x1=\"" << left - 5 << "\" y1=\"" << num(sy(e))
            << "\" x2=\"" << left << "\" y2=\"" << num(sy(e))
            << "\" stroke=\"black\"/>\n";
        out << "  <text x=\"" << left - 8 << "\" y=\"" << num(sy(e) + 4)
            << "\" font-size=\"12\" text-anchor=\"end\">" << num(e)
            << "</text>\n";
    }
    out << "  <text x=\"" << (left + right) / 2 << "\" y=\"" << bottom + 45
        << "\" font-size=\"14\" text-anchor=\"middle\">sampling "
           "probability</text>\n";
    out << "  <text x=\"20\" y=\"" << (top + bottom) / 2
        << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 "
           "20 "
        << (top + bottom) / 2 << ")\">relative error</text>\n";

    for (size_t mi = 0; mi < methods.size(); ++mi) {
        if (curves[mi].empty()) continue;
        const char* color = kColors[mi % 6];
        out << "  <polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"2\" points=\"";
        for (size_t pi = 0; pi < curves[mi].size(); ++pi) {
            if (pi) out << ' ';
            out << num(sx(curves[mi][pi].prob)) << ','
                << num(sy(curves[mi][pi].mean));
        }
        out << "\"/>\n";
        const double ly = top + 20 + 22 * static_cast<double>(mi);
        out << "  <rect x=\"" << right + 20 << "\" y=\"" << ly - 10
            << "\" width=\"14\" height=\"4\" fill=\"" << color << "\"/>\n";
        out << "  <text x=\"" << right + 40 << "\" y=\"" << ly - 3
            << "\" font-size=\"13\">" << xml_escape(methods[mi])
            << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace mirrormc
