#include "mirrormc/config.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <string>
#include <vector>

namespace mirrormc {

namespace {

using nlohmann::json;

void reject_unknown(const json& spec, std::initializer_list<const char*> known,
                    const char* where) {
    if (!spec.is_object())
        throw ConfigError(std::string(where) + ": expected a JSON object");
    for (const auto& [key, _] : spec.items())
        if (std::find_if(known.begin(), known.end(), [&](const char* k) {
                return key == k;
            }) == known.end())
            throw ConfigError(std::string(where) + ": unknown key '" + key +
                              "'");
}

double get_number(const json& spec, const char* key, double fallback) {
    if (!spec.contains(key)) return fallback;
    if (!spec.at(key).is_number())
        throw ConfigError(std::string("config: '") + key + "' must be a number");
    return spec.at(key).get<double>();
}

}  // namespace

std::unique_ptr<MirrorMap> make_mirror(const json& spec) {
    reject_unknown(spec, {"kind", "q", "nu", "scale"}, "mirror");
    const std::string kind = spec.value("kind", "frobenius");
    if (kind == "frobenius") {
        if (spec.contains("q") || spec.contains("nu"))
            throw ConfigError("mirror: q/nu only apply to the schatten kind");
        return std::make_unique<FrobeniusMirror>(get_number(spec, "scale", 1.0));
    }
    if (kind == "schatten") {
        if (spec.contains("scale"))
            throw ConfigError("mirror: scale only applies to the frobenius kind");
        return std::make_unique<SchattenMirror>(get_number(spec, "q", 1.05),
                                                get_number(spec, "nu", 0.0));
    }
    throw ConfigError("mirror: unknown kind '" + kind + "'");
}

std::unique_ptr<ScalarLoss> make_loss(const json& spec) {
    reject_unknown(spec, {"kind", "r"}, "loss");
    const std::string kind = spec.value("kind", "squared");
    if (kind == "squared") {
        if (spec.contains("r"))
            throw ConfigError("loss: r only applies to the power kind");
        return std::make_unique<SquaredLoss>();
    }
    if (kind == "power") return std::make_unique<PowerLoss>(get_number(spec, "r", 1.5));
    throw ConfigError("loss: unknown kind '" + kind + "'");
}

RunRecipe parse_run_config(const json& spec, Index n, Index m) {
    reject_unknown(spec,
                   {"mirror", "loss", "eta", "iters", "batch", "seed",
                    "stop_tol", "record_every", "svt", "softimpute"},
                   "config");
    RunRecipe recipe;
    recipe.mirror = make_mirror(spec.value("mirror", json::object()));
    recipe.loss = make_loss(spec.value("loss", json::object()));

    SolverConfig& sc = recipe.solver;
    sc.eta = get_number(spec, "eta", 1.0);
    sc.max_iters = static_cast<Index>(get_number(spec, "iters", 200));
    sc.stop_tol = get_number(spec, "stop_tol", 0.0);
    sc.record_every = static_cast<Index>(get_number(spec, "record_every", 1));
    if (spec.contains("seed")) {
        if (!spec.at("seed").is_number_integer())
            throw ConfigError("config: seed must be an integer");
        sc.seed = spec.at("seed").get<std::uint64_t>();
    }
    if (spec.contains("batch")) {
        const json& batch = spec.at("batch");
        reject_unknown(batch, {"scheme", "B"}, "batch");
        sc.batch.scheme =
            parse_batch_scheme(batch.value("scheme", std::string("full")));
        sc.batch.batch_size = static_cast<Index>(get_number(batch, "B", 1));
    }
    sc.validate();

    const json svt = spec.value("svt", json::object());
    reject_unknown(svt, {"tau", "delta", "iters"}, "svt");
    recipe.svt.tau =
        get_number(svt, "tau", 5.0 * static_cast<double>(std::max(n, m)));
    recipe.svt.delta = get_number(svt, "delta", 0.8);
    recipe.svt.max_iters =
        static_cast<Index>(get_number(svt, "iters", sc.max_iters));

    const json si = spec.value("softimpute", json::object());
    reject_unknown(si, {"lambda", "iters"}, "softimpute");
    recipe.soft_impute.lambda = get_number(si, "lambda", 1.0);
    recipe.soft_impute.max_iters =
        static_cast<Index>(get_number(si, "iters", sc.max_iters));

    return recipe;
}

}  // namespace mirrormc
