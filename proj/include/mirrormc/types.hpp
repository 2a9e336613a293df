#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mirrormc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Shape or length mismatch between an operator and its argument.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Invalid configuration value (unknown scheme, bad exponent, ...).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Iteration produced non-finite values; carries the offending iteration.
struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& what, Index iter)
        : std::runtime_error(what), iteration(iter) {}
    Index iteration;
};

/// Scalar solver or decomposition failed to converge.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Constraint system admits no interpolating solution.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File could not be read, written, or parsed.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Column-major vectorization throughout (Eigen's native storage order).
inline Vector vec(const Matrix& W) {
    return Eigen::Map<const Vector>(W.data(), W.size());
}

inline Matrix unvec(const Vector& x, Index rows, Index cols) {
    if (x.size() != rows * cols)
        throw DimensionError("unvec: size " + std::to_string(x.size()) +
                             " does not match " + std::to_string(rows) + "x" +
                             std::to_string(cols));
    return Eigen::Map<const Matrix>(x.data(), rows, cols);
}

}  // namespace mirrormc
