#include "mirrormc/operators.hpp"

#include "mirrormc/io.hpp"
#include "mirrormc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace mirrormc {

ObservationMask::ObservationMask(std::vector<std::pair<Index, Index>> entries,
                                 Index rows, Index cols)
    : entries_(std::move(entries)), rows_(rows), cols_(cols) {
    if (rows_ <= 0 || cols_ <= 0)
        throw DimensionError("ObservationMask: nonpositive dimensions");
    std::set<std::pair<Index, Index>> seen;
    for (const auto& [i, j] : entries_) {
        if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
            throw DimensionError("ObservationMask: entry (" + std::to_string(i) +
                                 "," + std::to_string(j) + ") out of range");
        if (!seen.insert({i, j}).second)
            throw DimensionError("ObservationMask: duplicate entry (" +
                                 std::to_string(i) + "," + std::to_string(j) +
                                 ")");
    }
}

ConstraintSystem ConstraintSystem::from_mask(const ObservationMask& mask,
                                             const Vector& observed, Index d,
                                             Index k) {
    if (mask.size() == 0)
        throw DimensionError("from_mask: empty mask");
    if (observed.size() != mask.size())
        throw DimensionError("from_mask: " + std::to_string(observed.size()) +
                             " values for " + std::to_string(mask.size()) +
                             " mask entries");
    if (mask.rows() > d || mask.cols() > k)
        throw DimensionError("from_mask: mask exceeds matrix dimensions");
    ConstraintSystem sys;
    sys.d_ = d;
    sys.k_ = k;
    sys.targets_ = observed;
    sys.mask_entries_ = mask.entries();
    for (const auto& [i, j] : sys.mask_entries_)
        if (i >= d || j >= k)
            throw DimensionError("from_mask: index out of range");
    return sys;
}

ConstraintSystem ConstraintSystem::from_classifier(const Matrix& X,
                                                   const Matrix& Y) {
    if (X.rows() != Y.rows())
        throw DimensionError("from_classifier: X has " +
                             std::to_string(X.rows()) + " rows, Y has " +
                             std::to_string(Y.rows()));
    const Index n = X.rows(), d = X.cols(), k = Y.cols();
    if (n == 0 || d == 0 || k == 0)
        throw DimensionError("from_classifier: empty data");
    std::vector<Matrix> constraints;
    constraints.reserve(n * k);
    Vector b(n * k);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < k; ++j) {
            Matrix a = Matrix::Zero(d, k);
            a.col(j) = X.row(i).transpose();
            constraints.push_back(std::move(a));
            b(i * k + j) = Y(i, j);
        }
    }
    return from_dense(std::move(constraints), std::move(b));
}

ConstraintSystem ConstraintSystem::from_dense(std::vector<Matrix> constraints,
                                              Vector targets) {
    if (constraints.empty())
        throw DimensionError("from_dense: no constraints");
    if (targets.size() != static_cast<Index>(constraints.size()))
        throw DimensionError("from_dense: target length mismatch");
    ConstraintSystem sys;
    sys.d_ = constraints.front().rows();
    sys.k_ = constraints.front().cols();
    for (const Matrix& a : constraints)
        if (a.rows() != sys.d_ || a.cols() != sys.k_)
            throw DimensionError("from_dense: inconsistent constraint shapes");
    sys.targets_ = std::move(targets);
    sys.dense_ = std::move(constraints);

    // Rank-revealing factorization of A^T; singular values below
    // 1e-12 * sigma_max count as zero so duplicated rows stay harmless.
    const Index p = sys.num_constraints();
    Matrix At(sys.d_ * sys.k_, p);
    for (Index q = 0; q < p; ++q) At.col(q) = vec(sys.dense_[q]);
    Eigen::BDCSVD<Matrix> svd(At, Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    const double cutoff = s.size() > 0 ? 1e-12 * s(0) : 0.0;
    Index rank = 0;
    while (rank < s.size() && s(rank) > cutoff) ++rank;
    sys.row_space_basis_ = svd.matrixU().leftCols(rank);
    sys.stacked_svals_ = s;
    return sys;
}

void ConstraintSystem::check_shape(const Matrix& W) const {
    if (W.rows() != d_ || W.cols() != k_)
        throw DimensionError("ConstraintSystem: expected " +
                             std::to_string(d_) + "x" + std::to_string(k_) +
                             " matrix, got " + std::to_string(W.rows()) + "x" +
                             std::to_string(W.cols()));
}

Vector ConstraintSystem::apply(const Matrix& W) const {
    check_shape(W);
    Vector out(num_constraints());
    if (is_mask_system()) {
        for (Index q = 0; q < num_constraints(); ++q) {
            const auto& [i, j] = mask_entries_[q];
            out(q) = W(i, j);
        }
    } else {
        for (Index q = 0; q < num_constraints(); ++q)
            out(q) = (dense_[q].array() * W.array()).sum();
    }
    return out;
}

Matrix ConstraintSystem::adjoint_apply(const Vector& v) const {
    if (v.size() != num_constraints())
        throw DimensionError("adjoint_apply: vector length " +
                             std::to_string(v.size()) + " != " +
                             std::to_string(num_constraints()));
    Matrix out = Matrix::Zero(d_, k_);
    if (is_mask_system()) {
        for (Index q = 0; q < num_constraints(); ++q) {
            const auto& [i, j] = mask_entries_[q];
            out(i, j) += v(q);
        }
    } else {
        for (Index q = 0; q < num_constraints(); ++q) out += v(q) * dense_[q];
    }
    return out;
}

Matrix ConstraintSystem::constraint(Index q) const {
    if (q < 0 || q >= num_constraints())
        throw DimensionError("constraint: index out of range");
    if (is_mask_system()) {
        Matrix a = Matrix::Zero(d_, k_);
        a(mask_entries_[q].first, mask_entries_[q].second) = 1.0;
        return a;
    }
    return dense_[q];
}

Matrix ConstraintSystem::stacked() const {
    Matrix A(num_constraints(), d_ * k_);
    for (Index q = 0; q < num_constraints(); ++q)
        A.row(q) = vec(constraint(q)).transpose();
    return A;
}

double ConstraintSystem::min_singular_value() const {
    // Distinct indicator rows are orthonormal.
    if (is_mask_system()) return 1.0;
    if (d_ * k_ <= 65536) {
        const Vector& s = stacked_svals_;
        return s.size() == 0 ? 0.0 : s(s.size() - 1);
    }
    return detail::min_singular_value_iterative(*this);
}

ConstraintSystem::RowSpaceSplit ConstraintSystem::project_row_space(
    const Matrix& D) const {
    check_shape(D);
    RowSpaceSplit split;
    if (is_mask_system()) {
        // Row space of indicator constraints is the span of observed cells.
        split.P = Matrix::Zero(d_, k_);
        for (const auto& [i, j] : mask_entries_) split.P(i, j) = D(i, j);
    } else {
        const Vector coords = row_space_basis_.transpose() * vec(D);
        split.P = unvec(row_space_basis_ * coords, d_, k_);
    }
    split.P_perp = D - split.P;
    return split;
}

namespace detail {

double min_singular_value_iterative(const ConstraintSystem& system) {
    const Index p = system.num_constraints();
    // Matrix-free y = A A^T x through apply/adjoint.
    const auto gram = [&](const Vector& x) {
        return system.apply(system.adjoint_apply(x));
    };
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> gauss;
    Vector x(p);
    for (Index i = 0; i < p; ++i) x(i) = gauss(rng);
    x.normalize();

    // Largest eigenvalue of the Gram matrix first.
    double lambda_max = 0.0;
    for (int it = 0; it < 2000; ++it) {
        Vector y = gram(x);
        const double lambda = x.dot(y);
        y.normalize();
        if (std::abs(lambda - lambda_max) <= 1e-12 * std::max(1.0, lambda))
            break;
        lambda_max = lambda;
        x = y;
    }
    // Then the smallest via the shifted operator lambda_max I - A A^T.
    Vector z(p);
    for (Index i = 0; i < p; ++i) z(i) = gauss(rng);
    z.normalize();
    double shifted = 0.0;
    for (int it = 0; it < 20000; ++it) {
        Vector y = lambda_max * z - gram(z);
        const double lambda = z.dot(y);
        const double norm = y.norm();
        if (norm == 0.0) break;  // Gram is lambda_max * I
        y /= norm;
        if (std::abs(lambda - shifted) <= 1e-13 * std::max(1.0, lambda_max))
            break;
        shifted = lambda;
        z = y;
    }
    const double lambda_min = std::max(lambda_max - shifted, 0.0);
    return std::sqrt(lambda_min);
}

}  // namespace detail

void write_mask_csv(const std::filesystem::path& path,
                    const ObservationMask& mask, const Vector& observed) {
    if (observed.size() != mask.size())
        throw DimensionError("write_mask_csv: value count mismatch");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "row,col,value\n";
    for (Index q = 0; q < mask.size(); ++q) {
        const auto& [i, j] = mask.entries()[q];
        out << (i + 1) << ',' << (j + 1) << ',' << format_full(observed(q))
            << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

MaskData read_mask_csv(const std::filesystem::path& path, Index d, Index k) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("row,col,value", 0) != 0)
        throw IoError(path.string() + ": missing row,col,value header");
    std::vector<std::pair<Index, Index>> entries;
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        long i = 0, j = 0;
        double v = 0.0;
        char c1 = 0, c2 = 0;
        if (!(ss >> i >> c1 >> j >> c2 >> v) || c1 != ',' || c2 != ',')
            throw IoError(path.string() + ": malformed line '" + line + "'");
        entries.emplace_back(i - 1, j - 1);
        values.push_back(v);
    }
    Vector observed = Eigen::Map<const Vector>(values.data(), values.size());
    return MaskData{ObservationMask(std::move(entries), d, k),
                    std::move(observed)};
}

}  // namespace mirrormc
