#pragma once

#include "mirrormc/baselines.hpp"
#include "mirrormc/losses.hpp"
#include "mirrormc/mirrors.hpp"
#include "mirrormc/smd.hpp"

#include <nlohmann/json_fwd.hpp>

#include <memory>

namespace mirrormc {

/// {"kind": "frobenius"|"schatten", "q": real, "nu": real, "scale": real}
std::unique_ptr<MirrorMap> make_mirror(const nlohmann::json& spec);

/// {"kind": "squared"|"power", "r": real}
std::unique_ptr<ScalarLoss> make_loss(const nlohmann::json& spec);

/// {"mirror": {...}, "loss": {...}, "eta": real, "iters": int,
///  "batch": {"scheme": "full"|"uniform_with_replacement", "B": int},
///  "seed": int, "stop_tol": real, "record_every": int}
/// Every field has a default; unknown keys are rejected.
struct RunRecipe {
    std::unique_ptr<MirrorMap> mirror;
    std::unique_ptr<ScalarLoss> loss;
    SolverConfig solver;
    SvtConfig svt;
    SoftImputeConfig soft_impute;
};
RunRecipe parse_run_config(const nlohmann::json& spec, Index n, Index m);

}  // namespace mirrormc
