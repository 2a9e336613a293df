#pragma once

#include "mirrormc/operators.hpp"
#include "mirrormc/types.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace mirrormc {

/// Scalar convex loss applied per residual. value(0) = 0, value >= 0,
/// derivative continuous at 0 with derivative(0) = 0.
class ScalarLoss {
  public:
    virtual ~ScalarLoss() = default;
    virtual double value(double z) const = 0;
    virtual double derivative(double z) const = 0;
    /// Strong convexity modulus mu when globally valid.
    virtual std::optional<double> modulus() const = 0;
    virtual std::string describe() const = 0;
};

/// z^2 / 2, mu = 1. The default and the canonical strongly convex instance.
class SquaredLoss final : public ScalarLoss {
  public:
    double value(double z) const override { return 0.5 * z * z; }
    double derivative(double z) const override { return z; }
    std::optional<double> modulus() const override { return 1.0; }
    std::string describe() const override { return "squared"; }
};

/// |z|^r / r for r in (1, 2]. Not strongly convex globally for r < 2, so it
/// is excluded from the rate claims; shipped as a documented extension.
class PowerLoss final : public ScalarLoss {
  public:
    explicit PowerLoss(double r);
    double value(double z) const override;
    double derivative(double z) const override;
    std::optional<double> modulus() const override;
    std::string describe() const override;
    double power() const { return r_; }

  private:
    double r_;
};

enum class BatchScheme { Full, UniformWithReplacement };

BatchScheme parse_batch_scheme(const std::string& name);
std::string batch_scheme_name(BatchScheme scheme);

/// Constraint indices (0-based, repeats allowed) participating in one step.
struct BatchSpec {
    std::vector<Index> indices;
    Index size() const { return static_cast<Index>(indices.size()); }
};

/// Full: 0..p-1 deterministically. UniformWithReplacement: batch_size i.i.d.
/// uniform draws, which keeps the batch loss unbiased.
BatchSpec sample_batch(std::mt19937_64& rng, Index num_constraints,
                       Index batch_size, BatchScheme scheme);

/// (1/p) sum_i value(A(W)_i - b_i).
double full_loss(const ScalarLoss& loss, const ConstraintSystem& system,
                 const Matrix& W);

/// (1/B) sum_j value(A(W)_{i_j} - b_{i_j}).
double batch_loss(const ScalarLoss& loss, const ConstraintSystem& system,
                  const Matrix& W, const BatchSpec& batch);

/// (1/B) sum_j derivative(A(W)_{i_j} - b_{i_j}) a_{i_j}. Lies in the row
/// space of the constraint operator by construction.
Matrix batch_gradient(const ScalarLoss& loss, const ConstraintSystem& system,
                      const Matrix& W, const BatchSpec& batch);

/// Bregman divergence of the batch loss, D_{L_t}(U, V).
double batch_bregman(const ScalarLoss& loss, const ConstraintSystem& system,
                     const Matrix& U, const Matrix& V, const BatchSpec& batch);

}  // namespace mirrormc
