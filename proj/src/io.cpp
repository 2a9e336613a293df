#include "mirrormc/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace mirrormc {

std::string format_full(double x) {
    // Shortest representation that parses back to the same double.
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    if (res.ec == std::errc{}) return std::string(buf, res.ptr);
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& M) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) {
            if (j) out << ',';
            out << format_full(M(i, j));
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError(path.string() + ": ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError(path.string() + ": empty matrix file");
    Matrix M(rows.size(), rows.front().size());
    for (Index i = 0; i < M.rows(); ++i)
        for (Index j = 0; j < M.cols(); ++j)
            M(i, j) = rows[i][j];
    return M;
}

}  // namespace mirrormc
