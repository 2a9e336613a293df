#include "mirrormc/losses.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace mirrormc {

PowerLoss::PowerLoss(double r) : r_(r) {
    if (!(r > 1.0 && r <= 2.0))
        throw ConfigError("PowerLoss: exponent must lie in (1, 2]");
}

double PowerLoss::value(double z) const {
    return std::pow(std::abs(z), r_) / r_;
}

double PowerLoss::derivative(double z) const {
    if (z == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(z), r_ - 1.0), z);
}

std::optional<double> PowerLoss::modulus() const {
    if (r_ == 2.0) return 1.0;
    return std::nullopt;
}

std::string PowerLoss::describe() const {
    std::ostringstream ss;
    ss << "power(r=" << r_ << ")";
    return ss.str();
}

BatchScheme parse_batch_scheme(const std::string& name) {
    if (name == "full") return BatchScheme::Full;
    if (name == "uniform_with_replacement")
        return BatchScheme::UniformWithReplacement;
    throw ConfigError("unknown batch scheme '" + name + "'");
}

std::string batch_scheme_name(BatchScheme scheme) {
    return scheme == BatchScheme::Full ? "full" : "uniform_with_replacement";
}

BatchSpec sample_batch(std::mt19937_64& rng, Index num_constraints,
                       Index batch_size, BatchScheme scheme) {
    if (num_constraints < 1) throw ConfigError("sample_batch: no constraints");
    BatchSpec batch;
    if (scheme == BatchScheme::Full) {
        batch.indices.resize(num_constraints);
        std::iota(batch.indices.begin(), batch.indices.end(), Index{0});
        return batch;
    }
    if (batch_size < 1) throw ConfigError("sample_batch: batch size < 1");
    std::uniform_int_distribution<Index> pick(0, num_constraints - 1);
    batch.indices.reserve(batch_size);
    for (Index j = 0; j < batch_size; ++j) batch.indices.push_back(pick(rng));
    return batch;
}

namespace {

void check_batch(const BatchSpec& batch, Index num_constraints) {
    if (batch.size() == 0) throw ConfigError("empty batch");
    for (Index idx : batch.indices)
        if (idx < 0 || idx >= num_constraints)
            throw ConfigError("batch index out of range");
}

}  // namespace

double full_loss(const ScalarLoss& loss, const ConstraintSystem& system,
                 const Matrix& W) {
    const Vector residuals = system.apply(W) - system.targets();
    double sum = 0.0;
    for (Index i = 0; i < residuals.size(); ++i)
        sum += loss.value(residuals(i));
    return sum / static_cast<double>(residuals.size());
}

double batch_loss(const ScalarLoss& loss, const ConstraintSystem& system,
                  const Matrix& W, const BatchSpec& batch) {
    check_batch(batch, system.num_constraints());
    const Vector residuals = system.apply(W) - system.targets();
    double sum = 0.0;
    for (Index idx : batch.indices) sum += loss.value(residuals(idx));
    return sum / static_cast<double>(batch.size());
}

Matrix batch_gradient(const ScalarLoss& loss, const ConstraintSystem& system,
                      const Matrix& W, const BatchSpec& batch) {
    check_batch(batch, system.num_constraints());
    const Vector residuals = system.apply(W) - system.targets();
    // Repeats in the batch accumulate weight, so one adjoint pass suffices.
    Vector weights = Vector::Zero(system.num_constraints());
    for (Index idx : batch.indices) weights(idx) += loss.derivative(residuals(idx));
    weights /= static_cast<double>(batch.size());
    return system.adjoint_apply(weights);
}

double batch_bregman(const ScalarLoss& loss, const ConstraintSystem& system,
                     const Matrix& U, const Matrix& V, const BatchSpec& batch) {
    const Matrix G = batch_gradient(loss, system, V, batch);
    return batch_loss(loss, system, U, batch) -
           batch_loss(loss, system, V, batch) -
           (G.array() * (U - V).array()).sum();
}

}  // namespace mirrormc
