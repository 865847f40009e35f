#include "oracles.hpp"
#include "smpset/worst_case.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace smpset;
using smpset::testing::sphere_grid_min;

namespace {

SfMatrix random_sfs(Rng& rng, int n, int d) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SfMatrix m(n, d);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) m(i, k) = u(rng);
    }
    return m;
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

} // namespace

TEST(SolveWorstCase, SingleSfGivesNegatedDirection) {
    SfMatrix sfs(1, 2);
    sfs << 0.6, 0.8;
    for (const auto& sol : {solve_worst_case(sfs), solve_worst_case_qp(sfs)}) {
        EXPECT_NEAR(sol.w_bar[0], -0.6, 1e-12);
        EXPECT_NEAR(sol.w_bar[1], -0.8, 1e-12);
        EXPECT_NEAR(sol.value, -1.0, 1e-12);
        EXPECT_EQ(sol.active_indices, std::vector<int>{0});
    }
}

TEST(SolveWorstCase, SimplexVerticesReachInverseSqrtD) {
    for (int d : {2, 3, 4, 8}) {
        const SfMatrix sfs = Matrix::Identity(d, d);
        const auto sol = solve_worst_case(sfs);
        EXPECT_NEAR(sol.value, -1.0 / std::sqrt(double(d)), 1e-12) << "d=" << d;
        for (int k = 0; k < d; ++k) EXPECT_NEAR(sol.w_bar[k], -1.0 / std::sqrt(double(d)), 1e-12);
        EXPECT_EQ(int(sol.active_indices.size()), d);
        EXPECT_NEAR(solve_worst_case_qp(sfs).value, -1.0 / std::sqrt(double(d)), 1e-12);
    }
}

TEST(SolveWorstCase, MatchesCircleGridOracle) {
    Rng rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        const SfMatrix sfs = random_sfs(rng, 3, 2);
        EXPECT_NEAR(solve_worst_case(sfs).value, sphere_grid_min(sfs), 1e-4);
    }
}

TEST(SolveWorstCaseQp, AgreesWithSubgradientAndSphereOracle) {
    Rng rng(23);
    for (int trial = 0; trial < 5; ++trial) {
        const SfMatrix sfs = random_sfs(rng, 4, 3);
        const double qp = solve_worst_case_qp(sfs).value;
        EXPECT_NEAR(qp, solve_worst_case(sfs).value, 1e-4);
        EXPECT_NEAR(qp, sphere_grid_min(sfs, 200000), 1e-4);
    }
}

TEST(SolveWorstCase, SubgradientPhaseAloneIsClose) {
    Rng rng(5);
    SolverConfig cfg;
    for (int trial = 0; trial < 20; ++trial) {
        const SfMatrix sfs = random_sfs(rng, 1 + trial % 6, 2 + trial % 4);
        const auto sub = detail::subgradient_descent(sfs, cfg);
        const double exact = solve_worst_case_qp(sfs).value;
        EXPECT_GE(sub.best_value, exact - 1e-12);
        EXPECT_LE(sub.best_value, exact + 1e-2);
        EXPECT_LE(sub.best_w.norm(), 1.0 + 1e-12);
    }
}

TEST(SolveWorstCase, RejectsEmptyAndNaN) {
    EXPECT_THROW(solve_worst_case(SfMatrix(0, 3)), validation_error);
    EXPECT_THROW(solve_worst_case_qp(SfMatrix(0, 3)), validation_error);
    EXPECT_THROW(solve_worst_case(std::vector<Vector>{}), validation_error);
    SfMatrix bad(2, 2);
    bad << 0.1, std::nan(""), 0.3, 0.4;
    EXPECT_THROW(solve_worst_case(bad), validation_error);
    EXPECT_THROW(solve_worst_case_qp(bad), validation_error);
    SolverConfig cfg;
    cfg.max_iterations = 0;
    EXPECT_THROW(solve_worst_case(Matrix::Identity(2, 2), cfg), validation_error);
}

TEST(SolveWorstCase, AllZeroSfsAreDegenerate) {
    const SfMatrix sfs = SfMatrix::Zero(3, 4);
    for (const auto& sol : {solve_worst_case(sfs), solve_worst_case_qp(sfs)}) {
        EXPECT_TRUE(sol.degenerate);
        EXPECT_EQ(sol.value, 0.0);
        for (int k = 0; k < 4; ++k) EXPECT_NEAR(sol.w_bar[k], -0.5, 1e-15);
    }
}

TEST(SolveWorstCase, ZeroSfAmongOthersHasValueZero) {
    SfMatrix sfs(2, 2);
    sfs << 0.0, 0.0, 0.3, 0.9;
    const auto sol = solve_worst_case(sfs);
    EXPECT_NEAR(sol.value, 0.0, 1e-15);
    EXPECT_NEAR(sol.w_bar.norm(), 1.0, 1e-12);
}

TEST(ExtractActive, SingletonAndSymmetricSimplex) {
    SfMatrix one(1, 3);
    one << 0.2, 0.3, 0.1;
    EXPECT_EQ(extract_active(one, solve_worst_case(one), 1e-6), std::vector<int>{0});
    const SfMatrix simplex = Matrix::Identity(3, 3);
    EXPECT_EQ(extract_active(simplex, solve_worst_case(simplex), 1e-6), (std::vector<int>{0, 1, 2}));
}

TEST(ExtractActive, ScaledCopyPushesTheOriginalOut) {
    // psi_3 = 0.5 psi_1 sits closer to the origin along the same ray, so at
    // w_bar (where every value is negative) psi_1 scores strictly below v_bar.
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        SfMatrix sfs(3, 3);
        sfs.topRows(2) = random_sfs(rng, 2, 3);
        sfs.row(2) = 0.5 * sfs.row(0);
        const auto sol = solve_worst_case(sfs);
        ASSERT_LT(sol.value, 0.0);
        EXPECT_LT(sfs.row(0).dot(sol.w_bar.weights()), sol.value - 1e-6);
        EXPECT_FALSE(contains(sol.active_indices, 0));
    }
}

TEST(WorstCaseProperties, SolversAgreeNormBindsAndActiveSetSuffices) {
    Rng rng(2718);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = std::array{2, 3, 5}[size_t(trial % 3)];
        const int n = 1 + trial % 6;
        const SfMatrix sfs = random_sfs(rng, n, d);
        const auto sub = solve_worst_case(sfs);
        const auto qp = solve_worst_case_qp(sfs);
        EXPECT_NEAR(sub.value, qp.value, 1e-4) << "trial " << trial;
        EXPECT_NEAR(sub.w_bar.norm(), 1.0, 1e-6);
        EXPECT_NEAR(qp.w_bar.norm(), 1.0, 1e-6);
        EXPECT_NEAR(sub.value, max_linear(sfs, sub.w_bar.weights()), 1e-9);
        ASSERT_FALSE(sub.active_indices.empty());

        SfMatrix active(Eigen::Index(sub.active_indices.size()), d);
        for (size_t k = 0; k < sub.active_indices.size(); ++k) active.row(Eigen::Index(k)) = sfs.row(sub.active_indices[k]);
        EXPECT_NEAR(solve_worst_case(active).value, sub.value, 1e-9);
    }
}

TEST(WorstCaseProperties, ZeroMeanConstraint) {
    Rng rng(314);
    SolverConfig zero;
    zero.zero_mean = true;
    for (int trial = 0; trial < 60; ++trial) {
        const int d = 2 + trial % 4;
        const SfMatrix sfs = random_sfs(rng, 1 + trial % 5, d);
        const auto plain = solve_worst_case(sfs);
        for (const auto& sol : {solve_worst_case(sfs, zero), solve_worst_case_qp(sfs, zero)}) {
            EXPECT_LE(std::abs(sol.w_bar.weights().sum()), 1e-8);
            EXPECT_GE(sol.value, plain.value - 1e-9);
            EXPECT_LE(sol.w_bar.norm(), 1.0 + 1e-9);
        }
        EXPECT_NEAR(solve_worst_case(sfs, zero).value, solve_worst_case_qp(sfs, zero).value, 1e-4);
    }
}

TEST(WorstCaseProperties, ZeroMeanOnSymmetricInstanceIsUnchanged) {
    // Nonnegative SFs always give a w_bar with negative sum, so the instance
    // uses signed rows whose hull point nearest the origin, (0.5, 0.5, -1),
    // already has zero mean.
    SfMatrix sfs(2, 3);
    sfs << 1.0, 0.0, -1.0, 0.0, 1.0, -1.0;
    SolverConfig zero;
    zero.zero_mean = true;
    const auto plain = solve_worst_case(sfs);
    ASSERT_NEAR(plain.w_bar.weights().sum(), 0.0, 1e-12);
    const auto constrained = solve_worst_case(sfs, zero);
    EXPECT_LE((plain.w_bar.weights() - constrained.w_bar.weights()).norm(), 1e-6);
    EXPECT_NEAR(plain.value, constrained.value, 1e-6);
    EXPECT_NEAR(plain.value, -std::sqrt(1.5), 1e-12);

    SfMatrix flat(2, 2);
    flat << 0.5, 0.5, 0.5, 0.5; // centered rows vanish: every zero-mean direction scores 0
    const auto sol = solve_worst_case(flat, zero);
    EXPECT_NEAR(sol.value, 0.0, 1e-15);
    EXPECT_LE(std::abs(sol.w_bar.weights().sum()), 1e-12);
    EXPECT_NEAR(sol.w_bar.norm(), 1.0, 1e-12);
}

TEST(WorstCaseProperties, AppendingNeverLowersTheValue) {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 2 + trial % 4;
        const int n = 1 + trial % 5;
        const SfMatrix sfs = random_sfs(rng, n, d);
        SfMatrix grown(n + 1, d);
        grown.topRows(n) = sfs;
        grown.row(n) = random_sfs(rng, 1, d);
        EXPECT_GE(solve_worst_case(grown).value, solve_worst_case(sfs).value - 1e-12);
    }
}
