#pragma once

#include "mirrormc/types.hpp"

#include <string>
#include <vector>

namespace mirrormc {

struct CheckRow {
    std::string check_name;
    double residual;
    double threshold;
    bool pass;
};

/// Runs the named suite ("identities", "bias", "rate", or "all") on built-in
/// small instances. tolerance_scale multiplies every threshold; scales below
/// 1 tighten the checks, which is mainly useful for exercising the failure
/// path. Unknown suite names raise ConfigError.
std::vector<CheckRow> run_verify_suite(const std::string& suite,
                                       double tolerance_scale = 1.0);

}  // namespace mirrormc
