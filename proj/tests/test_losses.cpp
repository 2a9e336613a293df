#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mirrormc/losses.hpp"
#include "mirrormc/operators.hpp"
#include "test_support.hpp"

#include <cmath>
#include <map>

using namespace mirrormc;
using mirrormc::testing::random_mask_entries;
using mirrormc::testing::random_matrix;
using mirrormc::testing::random_vector;

namespace {

ConstraintSystem small_mask_system(std::mt19937_64& rng, Index d, Index k,
                                   Index p) {
    const auto cells = random_mask_entries(rng, d, k, p);
    return ConstraintSystem::from_mask(ObservationMask(cells, d, k),
                                       random_vector(rng, p), d, k);
}

}  // namespace

TEST_CASE("full_loss") {
    std::mt19937_64 rng(61);
    const SquaredLoss loss;
    SUBCASE("zero at an interpolating point") {
        const Matrix M = random_matrix(rng, 3, 3);
        const auto cells = random_mask_entries(rng, 3, 3, 4);
        Vector vals(4);
        for (Index q = 0; q < 4; ++q) vals(q) = M(cells[q].first, cells[q].second);
        const auto sys = ConstraintSystem::from_mask(
            ObservationMask(cells, 3, 3), vals, 3, 3);
        CHECK(full_loss(loss, sys, M) == 0.0);
    }
    SUBCASE("single constraint with residual 2") {
        Vector b(1);
        b << 1.0;
        const auto sys = ConstraintSystem::from_mask(
            ObservationMask({{0, 0}}, 2, 2), b, 2, 2);
        Matrix W = Matrix::Zero(2, 2);
        W(0, 0) = 3.0;  // residual 3 - 1 = 2, squared loss 2
        CHECK(full_loss(loss, sys, W) == doctest::Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("matches a directly coded sum") {
        const auto sys = small_mask_system(rng, 4, 5, 7);
        const Matrix W = random_matrix(rng, 4, 5);
        const Vector res = sys.apply(W) - sys.targets();
        double expected = 0.0;
        for (Index i = 0; i < res.size(); ++i)
            expected += 0.5 * res(i) * res(i);
        expected /= static_cast<double>(res.size());
        CHECK(full_loss(loss, sys, W) ==
              doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("batch_gradient") {
    std::mt19937_64 rng(67);
    const SquaredLoss loss;
    SUBCASE("vanishes at an interpolating point") {
        const Matrix M = random_matrix(rng, 3, 4);
        const auto cells = random_mask_entries(rng, 3, 4, 5);
        Vector vals(5);
        for (Index q = 0; q < 5; ++q) vals(q) = M(cells[q].first, cells[q].second);
        const auto sys = ConstraintSystem::from_mask(
            ObservationMask(cells, 3, 4), vals, 3, 4);
        BatchSpec batch{{0, 1, 2, 3, 4}};
        CHECK(batch_gradient(loss, sys, M, batch).norm() == 0.0);
    }
    SUBCASE("full batch on a mask is the scaled residual scatter") {
        const auto sys = small_mask_system(rng, 4, 4, 6);
        const Matrix W = random_matrix(rng, 4, 4);
        std::mt19937_64 dummy(0);
        const BatchSpec batch = sample_batch(dummy, 6, 1, BatchScheme::Full);
        const Matrix G = batch_gradient(loss, sys, W, batch);
        Matrix expected = Matrix::Zero(4, 4);
        const Vector res = sys.apply(W) - sys.targets();
        for (Index q = 0; q < 6; ++q) {
            const auto& [i, j] = sys.mask_entries()[q];
            expected(i, j) = res(q) / 6.0;
        }
        CHECK((G - expected).norm() <= 1e-14 * (1 + expected.norm()));
    }
    SUBCASE("random batch with repeats matches finite differences") {
        const auto sys = small_mask_system(rng, 4, 5, 8);
        const Matrix W = random_matrix(rng, 4, 5);
        const BatchSpec batch{{2, 2, 5, 0, 7, 2}};
        const Matrix G = batch_gradient(loss, sys, W, batch);
        const double h = 1e-5 * (1.0 + W.norm());
        for (int trial = 0; trial < 4; ++trial) {
            Matrix E = random_matrix(rng, 4, 5);
            E /= E.norm();
            const double fd = (batch_loss(loss, sys, W + h * E, batch) -
                               batch_loss(loss, sys, W - h * E, batch)) /
                              (2.0 * h);
            const double analytic = (G.array() * E.array()).sum();
            CHECK(std::abs(fd - analytic) <=
                  1e-5 * std::max(1.0, std::abs(analytic)));
        }
    }
}

TEST_CASE("sample_batch") {
    SUBCASE("full scheme is the identity batch") {
        std::mt19937_64 rng(1);
        const BatchSpec batch = sample_batch(rng, 3, 1, BatchScheme::Full);
        REQUIRE(batch.size() == 3);
        CHECK(batch.indices == std::vector<Index>{0, 1, 2});
    }
    SUBCASE("uniform singleton frequencies within 3-sigma binomial bounds") {
        std::mt19937_64 rng(71);
        const Index p = 10;
        const int draws = 100000;
        std::map<Index, int> counts;
        for (int i = 0; i < draws; ++i) {
            const BatchSpec batch =
                sample_batch(rng, p, 1, BatchScheme::UniformWithReplacement);
            counts[batch.indices[0]]++;
        }
        const double expected = static_cast<double>(draws) / p;
        const double sigma = std::sqrt(draws * (1.0 / p) * (1.0 - 1.0 / p));
        for (Index i = 0; i < p; ++i) {
            CAPTURE(i);
            CHECK(std::abs(counts[i] - expected) <= 3.0 * sigma);
        }
        // Chi-square against the 99.9% quantile for 9 degrees of freedom.
        double chi2 = 0.0;
        for (Index i = 0; i < p; ++i) {
            const double diff = counts[i] - expected;
            chi2 += diff * diff / expected;
        }
        CHECK(chi2 <= 27.88);
    }
    SUBCASE("fixed seed reproduces the index sequence") {
        std::mt19937_64 a(5), b(5);
        for (int i = 0; i < 50; ++i) {
            const BatchSpec ba =
                sample_batch(a, 12, 3, BatchScheme::UniformWithReplacement);
            const BatchSpec bb =
                sample_batch(b, 12, 3, BatchScheme::UniformWithReplacement);
            CHECK(ba.indices == bb.indices);
        }
    }
    SUBCASE("unknown scheme names rejected") {
        CHECK_THROWS_AS(parse_batch_scheme("bogus"), ConfigError);
        CHECK(parse_batch_scheme("full") == BatchScheme::Full);
        CHECK(parse_batch_scheme("uniform_with_replacement") ==
              BatchScheme::UniformWithReplacement);
    }
}

TEST_CASE("loss properties") {
    std::mt19937_64 rng(73);
    const SquaredLoss loss;
    const auto sys = small_mask_system(rng, 5, 4, 9);
    const Matrix W = random_matrix(rng, 5, 4);

    SUBCASE("unbiasedness: averaged singleton gradients equal the full one") {
        std::mt19937_64 dummy(0);
        const BatchSpec full = sample_batch(dummy, 9, 1, BatchScheme::Full);
        const Matrix G_full = batch_gradient(loss, sys, W, full);
        Matrix G_avg = Matrix::Zero(5, 4);
        for (Index i = 0; i < 9; ++i) {
            BatchSpec single{{i}};
            G_avg += batch_gradient(loss, sys, W, single);
        }
        G_avg /= 9.0;
        CHECK((G_avg - G_full).norm() <= 1e-12 * (1 + G_full.norm()));
    }

    SUBCASE("batch gradients lie in the row space") {
        const BatchSpec batch{{1, 4, 4, 7}};
        const Matrix G = batch_gradient(loss, sys, W, batch);
        const auto split = sys.project_row_space(G);
        CHECK(split.P_perp.norm() <= 1e-10 * G.norm());
    }

    SUBCASE("squared loss is exactly 1-strongly convex") {
        std::uniform_real_distribution<double> unif(-3.0, 3.0);
        for (int trial = 0; trial < 50; ++trial) {
            const double z = unif(rng), w = unif(rng);
            const double lhs = loss.value(z);
            const double rhs = loss.value(w) + loss.derivative(w) * (z - w) +
                               0.5 * (z - w) * (z - w);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
        CHECK(loss.modulus() == 1.0);
    }

    SUBCASE("power loss basics") {
        const PowerLoss power(1.5);
        CHECK(power.value(0.0) == 0.0);
        CHECK(power.derivative(0.0) == 0.0);
        CHECK(power.value(2.0) == doctest::Approx(std::pow(2.0, 1.5) / 1.5));
        CHECK(power.derivative(-2.0) ==
              doctest::Approx(-std::pow(2.0, 0.5)));
        CHECK(!power.modulus().has_value());
        CHECK_THROWS_AS(PowerLoss(1.0), ConfigError);
        CHECK_THROWS_AS(PowerLoss(2.5), ConfigError);
    }
}
