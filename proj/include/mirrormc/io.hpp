#pragma once

#include "mirrormc/types.hpp"

#include <filesystem>
#include <string>

namespace mirrormc {

/// Shortest decimal form that round-trips the double exactly.
std::string format_full(double x);

/// Plain comma-separated numeric rows, no header.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& M);
Matrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace mirrormc
