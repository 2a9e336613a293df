#include "mirrormc/baselines.hpp"
#include "mirrormc/experiments.hpp"
#include "mirrormc/smd.hpp"
#include "mirrormc/verification.hpp"
#include "mirrormc/verify_suites.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <utility>
#include <vector>

namespace py = pybind11;
using namespace mirrormc;

namespace {

py::dict trace_to_dict(const RunTrace& trace) {
    const size_t n = trace.records.size();
    std::vector<Index> iters(n);
    std::vector<double> loss(n), breg(n), kkt(n), min_sv(n), seconds(n);
    for (size_t i = 0; i < n; ++i) {
        const TraceRecord& rec = trace.records[i];
        iters[i] = rec.iter;
        loss[i] = rec.loss;
        breg[i] = rec.bregman;
        kkt[i] = rec.kkt_residual;
        min_sv[i] = rec.min_sv;
        seconds[i] = rec.seconds;
    }
    py::dict out;
    out["iter"] = py::cast(iters);
    out["loss"] = py::cast(loss);
    out["bregman"] = py::cast(breg);
    out["kkt_residual"] = py::cast(kkt);
    out["min_sv"] = py::cast(min_sv);
    out["seconds"] = py::cast(seconds);
    return out;
}

SolverConfig make_solver_config(double eta, Index iters,
                                const std::string& batch_scheme,
                                Index batch_size, std::uint64_t seed,
                                double stop_tol, Index record_every) {
    SolverConfig config;
    config.eta = eta;
    config.max_iters = iters;
    config.batch.scheme = parse_batch_scheme(batch_scheme);
    config.batch.batch_size = batch_size;
    config.seed = seed;
    config.stop_tol = stop_tol;
    config.record_every = record_every;
    return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "Matrix stochastic mirror descent with spectral mirror maps, plus the "
        "SVT / Soft-Impute completion baselines";

    py::register_exception<DimensionError>(m, "DimensionError",
                                           PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError",
                                            PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError",
                                           PyExc_RuntimeError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError",
                                            PyExc_RuntimeError);

    py::class_<ObservationMask>(m, "ObservationMask")
        .def(py::init<std::vector<std::pair<Index, Index>>, Index, Index>(),
             py::arg("entries"), py::arg("rows"), py::arg("cols"))
        .def_property_readonly("entries", &ObservationMask::entries)
        .def_property_readonly("rows", &ObservationMask::rows)
        .def_property_readonly("cols", &ObservationMask::cols)
        .def("__len__", &ObservationMask::size);

    py::class_<ConstraintSystem>(m, "ConstraintSystem")
        .def_static("from_mask", &ConstraintSystem::from_mask,
                    py::arg("mask"), py::arg("observed"), py::arg("d"),
                    py::arg("k"))
        .def_static("from_classifier", &ConstraintSystem::from_classifier,
                    py::arg("X"), py::arg("Y"))
        .def_static("from_dense", &ConstraintSystem::from_dense,
                    py::arg("constraints"), py::arg("targets"))
        .def("apply", &ConstraintSystem::apply, py::arg("W"))
        .def("adjoint_apply", &ConstraintSystem::adjoint_apply, py::arg("v"))
        .def("constraint", &ConstraintSystem::constraint, py::arg("q"))
        .def("stacked", &ConstraintSystem::stacked)
        .def("min_singular_value", &ConstraintSystem::min_singular_value)
        .def(
            "project_row_space",
            [](const ConstraintSystem& sys, const Matrix& D) {
                auto split = sys.project_row_space(D);
                return py::make_tuple(split.P, split.P_perp);
            },
            py::arg("D"))
        .def_property_readonly("targets", &ConstraintSystem::targets)
        .def_property_readonly("d", &ConstraintSystem::d)
        .def_property_readonly("k", &ConstraintSystem::k)
        .def_property_readonly("num_constraints",
                               &ConstraintSystem::num_constraints)
        .def_property_readonly("overparameterized",
                               &ConstraintSystem::overparameterized);

    py::class_<MirrorMap, std::shared_ptr<MirrorMap>>(m, "MirrorMap")
        .def("potential", &MirrorMap::potential, py::arg("W"))
        .def("gradient", &MirrorMap::gradient, py::arg("W"))
        .def("inverse_gradient", &MirrorMap::inverse_gradient, py::arg("Z"))
        .def("__repr__", &MirrorMap::describe);

    py::class_<FrobeniusMirror, MirrorMap, std::shared_ptr<FrobeniusMirror>>(
        m, "FrobeniusMirror")
        .def(py::init<double>(), py::arg("scale") = 1.0);

    py::class_<SchattenMirror, MirrorMap, std::shared_ptr<SchattenMirror>>(
        m, "SchattenMirror")
        .def(py::init<double, double>(), py::arg("q"), py::arg("nu") = 0.0);

    py::class_<ScalarLoss, std::shared_ptr<ScalarLoss>>(m, "ScalarLoss")
        .def("value", &ScalarLoss::value, py::arg("z"))
        .def("derivative", &ScalarLoss::derivative, py::arg("z"))
        .def("__repr__", &ScalarLoss::describe);

    py::class_<SquaredLoss, ScalarLoss, std::shared_ptr<SquaredLoss>>(
        m, "SquaredLoss")
        .def(py::init<>());

    py::class_<PowerLoss, ScalarLoss, std::shared_ptr<PowerLoss>>(m,
                                                                  "PowerLoss")
        .def(py::init<double>(), py::arg("r"));

    m.def("bregman", &bregman, py::arg("mirror"), py::arg("U"), py::arg("V"));
    m.def("three_point_check", &three_point_check, py::arg("mirror"),
          py::arg("S"), py::arg("U"), py::arg("V"));
    m.def("soft_threshold", &soft_threshold, py::arg("W"), py::arg("tau"));

    m.def("full_loss", &full_loss, py::arg("loss"), py::arg("system"),
          py::arg("W"));
    m.def(
        "batch_gradient",
        [](const ScalarLoss& loss, const ConstraintSystem& system,
           const Matrix& W, const std::vector<Index>& indices) {
            return batch_gradient(loss, system, W, BatchSpec{indices});
        },
        py::arg("loss"), py::arg("system"), py::arg("W"), py::arg("indices"));
    m.def(
        "kkt_residual",
        [](const Matrix& W, const Matrix& W0, const MirrorMap& mirror,
           const ConstraintSystem& system) {
            const KktResidual res = kkt_residual(W, W0, mirror, system);
            return py::make_tuple(res.row_space_residual,
                                  res.constraint_violation);
        },
        py::arg("W"), py::arg("W0"), py::arg("mirror"), py::arg("system"),
        "Row-space residual of the dual displacement and the constraint "
        "violation, as a tuple.");

    m.def(
        "run_sweep",
        [](const std::vector<std::string>& methods,
           const std::vector<double>& probs,
           const std::vector<std::uint64_t>& seeds, Index n, Index m_,
           Index rank, Index iters, double smd_eta, int jobs) {
            SweepConfig config;
            config.n = n;
            config.m = m_;
            config.rank = rank;
            config.iters = iters;
            config.smd_eta = smd_eta;
            config.jobs = jobs;
            SweepResult result;
            {
                py::gil_scoped_release release;
                result = run_sweep(methods, probs, seeds, config);
            }
            py::list rows;
            for (const SweepCell& cell : result.rows) {
                py::dict row;
                row["method"] = cell.method;
                row["prob"] = cell.prob;
                row["seed"] = cell.seed;
                row["rel_error"] = cell.rel_error;
                row["iters"] = cell.iters;
                row["seconds"] = cell.seconds;
                row["error"] = cell.error;
                rows.append(row);
            }
            return rows;
        },
        py::arg("methods"), py::arg("probs"), py::arg("seeds"),
        py::arg("n") = 100, py::arg("m") = 100, py::arg("rank") = 5,
        py::arg("iters") = 200, py::arg("smd_eta") = 50.0, py::arg("jobs") = 0,
        "Benchmark sweep; one dict per (method, prob, seed) cell.");

    m.def(
        "run_smd",
        [](const Matrix& W0, const MirrorMap& mirror, const ScalarLoss& loss,
           const ConstraintSystem& system, double eta, Index iters,
           const std::string& batch_scheme, Index batch_size,
           std::uint64_t seed, double stop_tol, Index record_every) {
            RunResult res;
            {
                py::gil_scoped_release release;
                res = run(W0, mirror, loss, system,
                          make_solver_config(eta, iters, batch_scheme,
                                             batch_size, seed, stop_tol,
                                             record_every));
            }
            return py::make_tuple(res.W, trace_to_dict(res.trace));
        },
        py::arg("W0"), py::arg("mirror"), py::arg("loss"), py::arg("system"),
        py::arg("eta"), py::arg("iters") = 200,
        py::arg("batch_scheme") = "full", py::arg("batch_size") = 1,
        py::arg("seed") = 1, py::arg("stop_tol") = 0.0,
        py::arg("record_every") = 1,
        "Mirror descent from W0; returns (W, trace dict).");

    m.def(
        "run_svt",
        [](const ConstraintSystem& system, double tau, double delta,
           Index iters, Index record_every) {
            SvtConfig config{tau, delta, iters};
            config.record_every = record_every;
            RunResult res;
            {
                py::gil_scoped_release release;
                res = run_svt(system, config);
            }
            return py::make_tuple(res.W, trace_to_dict(res.trace));
        },
        py::arg("system"), py::arg("tau"), py::arg("delta") = 0.8,
        py::arg("iters") = 200, py::arg("record_every") = 1);

    m.def(
        "run_soft_impute",
        [](const ConstraintSystem& system, double lam, Index iters,
           Index record_every) {
            SoftImputeConfig config{lam, iters};
            config.record_every = record_every;
            RunResult res;
            {
                py::gil_scoped_release release;
                res = run_soft_impute(system, config);
            }
            return py::make_tuple(res.W, trace_to_dict(res.trace));
        },
        py::arg("system"), py::arg("lam") = 1.0, py::arg("iters") = 200,
        py::arg("record_every") = 1);

    py::class_<ProblemInstance>(m, "ProblemInstance")
        .def_readonly("M_true", &ProblemInstance::M_true)
        .def_readonly("mask", &ProblemInstance::mask)
        .def_readonly("observed", &ProblemInstance::observed)
        .def_readonly("rank", &ProblemInstance::rank)
        .def_readonly("prob", &ProblemInstance::prob)
        .def_readonly("seed", &ProblemInstance::seed)
        .def("system", &ProblemInstance::system);

    m.def("generate_instance", &generate_instance, py::arg("n"), py::arg("m"),
          py::arg("rank"), py::arg("prob"), py::arg("seed"));
    m.def("relative_error", &relative_error, py::arg("W"), py::arg("M_true"));
    m.def("min_frobenius_interpolator", &min_frobenius_interpolator,
          py::arg("system"), py::arg("W0"));

    m.def(
        "estimate_L",
        [](const MirrorMap& mirror,
           const std::vector<std::pair<Matrix, Matrix>>& pairs) {
            return estimate_L(mirror, pairs);
        },
        py::arg("mirror"), py::arg("pairs"));

    m.def(
        "fit_rate",
        [](const std::vector<Index>& iters,
           const std::vector<double>& divergences, Index burn_in) {
            if (iters.size() != divergences.size())
                throw DimensionError("fit_rate: length mismatch");
            RunTrace trace;
            for (size_t i = 0; i < iters.size(); ++i)
                trace.records.push_back(
                    {iters[i], 0.0, divergences[i], 0.0, 0.0, 0.0});
            const RateFit fit = fit_rate(trace, burn_in);
            py::dict out;
            out["slope"] = fit.slope;
            out["intercept"] = fit.intercept;
            out["r_squared"] = fit.r_squared;
            return out;
        },
        py::arg("iters"), py::arg("divergences"), py::arg("burn_in") = 0);

    m.def(
        "run_verify_suite",
        [](const std::string& suite, double tolerance_scale) {
            std::vector<CheckRow> checks;
            {
                py::gil_scoped_release release;
                checks = run_verify_suite(suite, tolerance_scale);
            }
            py::list rows;
            for (const CheckRow& row : checks) {
                py::dict item;
                item["check_name"] = row.check_name;
                item["residual"] = row.residual;
                item["threshold"] = row.threshold;
                item["pass"] = row.pass;
                rows.append(item);
            }
            return rows;
        },
        py::arg("suite") = "all", py::arg("tolerance_scale") = 1.0);
}
