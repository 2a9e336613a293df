#pragma once

#include "mirrormc/types.hpp"

#include <filesystem>
#include <utility>
#include <vector>

namespace mirrormc {

/// Set of observed entry positions (0-based). Entries are kept in insertion
/// order, duplicates and out-of-range indices are rejected at construction.
class ObservationMask {
  public:
    ObservationMask(std::vector<std::pair<Index, Index>> entries, Index rows,
                    Index cols);

    const std::vector<std::pair<Index, Index>>& entries() const {
        return entries_;
    }
    Index size() const { return static_cast<Index>(entries_.size()); }
    Index rows() const { return rows_; }
    Index cols() const { return cols_; }

  private:
    std::vector<std::pair<Index, Index>> entries_;
    Index rows_, cols_;
};

/// Linear constraint system A(W) = b on d x k matrices. Each constraint is a
/// d x k matrix a_q acting by the Frobenius inner product; the stacked matrix
/// A has rows vec(a_q) with column-major vec.
///
/// Completion masks are stored as index pairs rather than materialized
/// indicator matrices; constraint(q) exposes the dense contract either way.
/// Immutable after construction and safe to share across threads.
class ConstraintSystem {
  public:
    static ConstraintSystem from_mask(const ObservationMask& mask,
                                      const Vector& observed, Index d, Index k);
    /// Rows of X are data points, rows of Y the per-class targets; constraint
    /// (i, j) is x_i e_j^T ordered with the class index fastest.
    static ConstraintSystem from_classifier(const Matrix& X, const Matrix& Y);
    static ConstraintSystem from_dense(std::vector<Matrix> constraints,
                                       Vector targets);

    Vector apply(const Matrix& W) const;
    Matrix adjoint_apply(const Vector& v) const;

    /// Dense view of constraint q.
    Matrix constraint(Index q) const;
    /// Stacked num_constraints x (d*k) matrix with rows vec(a_q).
    Matrix stacked() const;

    double min_singular_value() const;

    struct RowSpaceSplit {
        Matrix P;       // vec(P) in range(A^T)
        Matrix P_perp;  // apply(P_perp) == 0
    };
    RowSpaceSplit project_row_space(const Matrix& D) const;

    const Vector& targets() const { return targets_; }
    Index num_constraints() const { return targets_.size(); }
    Index d() const { return d_; }
    Index k() const { return k_; }
    bool overparameterized() const { return num_constraints() < d_ * k_; }
    bool is_mask_system() const { return !mask_entries_.empty(); }
    const std::vector<std::pair<Index, Index>>& mask_entries() const {
        return mask_entries_;
    }

  private:
    ConstraintSystem() = default;
    void check_shape(const Matrix& W) const;

    Index d_ = 0, k_ = 0;
    Vector targets_;
    // Exactly one representation is populated.
    std::vector<std::pair<Index, Index>> mask_entries_;
    std::vector<Matrix> dense_;
    // Dense systems precompute an orthonormal row-space basis (columns span
    // range(A^T)) and the stacked singular values at construction; both stay
    // empty for mask systems, whose indicator rows are orthonormal already.
    Matrix row_space_basis_;
    Vector stacked_svals_;
};

namespace detail {
/// Smallest singular value of the stacked operator without materializing it:
/// power iteration on sigma_max^2 I - A A^T. Escape hatch for d*k > 65536.
double min_singular_value_iterative(const ConstraintSystem& system);
}  // namespace detail

/// CSV of `row,col,value` triples with 1-based indices, one header line.
void write_mask_csv(const std::filesystem::path& path,
                    const ObservationMask& mask, const Vector& observed);

struct MaskData {
    ObservationMask mask;
    Vector observed;
};
/// Reads the triple CSV back; mask dimensions are the given d, k.
MaskData read_mask_csv(const std::filesystem::path& path, Index d, Index k);

}  // namespace mirrormc
