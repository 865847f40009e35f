#include "oracles.hpp"
#include "smpset/discovery.hpp"
#include "smpset/gridworld.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace smpset;

namespace {

GridWorld small_grid(std::uint64_t seed) {
    GridSpec spec;
    spec.width = spec.height = 6;
    spec.num_item_classes = 3;
    spec.items_per_class = 2;
    spec.rng_seed = seed;
    return generate(spec);
}

} // namespace

TEST(Discover, StarReachesInverseSqrtD) {
    const auto star = make_star_mdp(4);
    for (std::uint64_t seed : {0u, 1u, 2u}) {
        DiscoveryConfig cfg;
        cfg.rng_seed = seed;
        const auto result = discover(star, cfg);
        EXPECT_EQ(result.log.stop, StopReason::converged);
        EXPECT_NEAR(result.log.records.back().v_bar, -0.5, 1e-9);
        EXPECT_EQ(result.policies.size(), 4u);
    }
}

TEST(Discover, FirstValueIsMinusNormOfFirstSf) {
    const auto world = small_grid(3);
    DiscoveryConfig cfg;
    cfg.rng_seed = 9;
    cfg.max_policies = 2;
    const auto result = discover(world.mdp, cfg);
    ASSERT_FALSE(result.log.records.empty());
    EXPECT_NEAR(result.log.records.front().v_bar, -result.policies.sf(0).aggregate.norm(), 1e-12);
    EXPECT_EQ(result.log.records.front().set_size, 1);
}

TEST(Discover, IdenticalSfsStopAfterOneIteration) {
    // One state; every action loops back and emits the same feature, so all
    // policies share one SF and the best response cannot improve.
    MdpTables t(1, 3, 2, 0.9);
    for (int a = 0; a < 3; ++a) {
        t.p(0, a, 0) = 1.0;
        t.phi(0, a, 0, 0) = 0.4;
        t.phi(0, a, 0, 1) = 0.7;
    }
    t.initial_dist[0] = 1.0;
    const auto result = discover(FeatureMdp(t), DiscoveryConfig{});
    ASSERT_EQ(result.log.records.size(), 1u);
    EXPECT_EQ(result.log.stop, StopReason::converged);
    EXPECT_EQ(result.policies.size(), 1u);
}

TEST(Discover, ValuesStrictlyImproveUntilConvergence) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto world = small_grid(seed);
        DiscoveryConfig cfg;
        cfg.rng_seed = seed;
        const auto result = discover(world.mdp, cfg);
        const auto& recs = result.log.records;
        for (size_t t = 0; t < recs.size(); ++t) {
            EXPECT_EQ(recs[t].iteration, int(t) + 1);
            EXPECT_EQ(recs[t].set_size, int(t) + 1);
            EXPECT_GE(recs[t].new_policy_value, recs[t].v_bar - 1e-9);
            EXPECT_NEAR(recs[t].w_bar.norm(), 1.0, 1e-9);
            if (t + 1 < recs.size()) {
                EXPECT_GT(recs[t].new_policy_value, recs[t].v_bar + cfg.improvement_tol);
                EXPECT_GT(recs[t + 1].v_bar, recs[t].v_bar);
            }
        }
        if (result.log.stop == StopReason::converged) {
            EXPECT_LE(recs.back().new_policy_value, recs.back().v_bar + cfg.improvement_tol);
        }
    }
}

TEST(Discover, SameSeedIsDeterministic) {
    const auto world = small_grid(4);
    DiscoveryConfig cfg;
    cfg.rng_seed = 17;
    const auto a = discover(world.mdp, cfg);
    const auto b = discover(world.mdp, cfg);
    ASSERT_EQ(a.log.records.size(), b.log.records.size());
    for (size_t t = 0; t < a.log.records.size(); ++t) {
        EXPECT_EQ(a.log.records[t].v_bar, b.log.records[t].v_bar);
        EXPECT_EQ(a.log.records[t].w_bar.weights(), b.log.records[t].w_bar.weights());
    }
    EXPECT_EQ(a.policies.policies(), b.policies.policies());
}

TEST(Discover, ObserverSeesEveryIteration) {
    const auto star = make_star_mdp(3);
    int calls = 0;
    const auto result = discover(star, DiscoveryConfig{},
                                 [&](const PolicySet& set, const WorstCaseSolution& sol, const DiscoveryRecord& rec) {
                                     ++calls;
                                     EXPECT_EQ(int(set.size()), rec.set_size);
                                     EXPECT_EQ(sol.value, rec.v_bar);
                                 });
    EXPECT_EQ(calls, int(result.log.records.size()));
}

TEST(Discover, MaxPoliciesCapsTheSet) {
    const auto star = make_star_mdp(5);
    DiscoveryConfig cfg;
    cfg.max_policies = 2;
    const auto result = discover(star, cfg);
    EXPECT_EQ(result.log.stop, StopReason::max_policies);
    EXPECT_EQ(result.policies.size(), 2u);
    EXPECT_NEAR(result.log.records.back().v_bar, -1.0 / std::sqrt(2.0), 1e-9);
}

TEST(PruneActive, KeepsTheWorstCaseValue) {
    Rng rng(6);
    const auto mdp = smpset::testing::random_mdp(rng, 6, 3, 3, 0.9, true);
    PolicySet set(mdp);
    for (int i = 0; i < 6; ++i) set.add(mdp, smpset::testing::random_policy(rng, 6, 3));
    const auto sol = solve_worst_case(set.sf_matrix());
    const auto pruned = prune_active(set, sol);
    EXPECT_EQ(pruned.size(), sol.active_indices.size());
    EXPECT_NEAR(solve_worst_case(pruned.sf_matrix()).value, sol.value, 1e-9);

    // all-active set is left as is
    const auto star = make_star_mdp(3);
    PolicySet arms(star);
    for (int k = 0; k < 3; ++k) arms.add(star, DeterministicPolicy(4, k));
    const auto arms_sol = solve_worst_case(arms.sf_matrix());
    EXPECT_EQ(prune_active(arms, arms_sol).policies(), arms.policies());
}

TEST(Discover, PruningStillConverges) {
    const auto star = make_star_mdp(4);
    DiscoveryConfig cfg;
    cfg.prune_inactive = true;
    const auto result = discover(star, cfg);
    EXPECT_EQ(result.log.stop, StopReason::converged);
    EXPECT_NEAR(result.log.records.back().v_bar, -0.5, 1e-9);

    const auto world = small_grid(5);
    cfg.rng_seed = 5;
    const auto full = discover(world.mdp, [&] {
        auto c = cfg;
        c.prune_inactive = false;
        return c;
    }());
    const auto pruned = discover(world.mdp, cfg);
    if (full.log.stop == StopReason::converged && pruned.log.stop == StopReason::converged) {
        EXPECT_NEAR(full.log.records.back().v_bar, pruned.log.records.back().v_bar, 1e-6);
    }
}

TEST(DiscoverBaseline, OrthogonalTrainsOnUnitVectors) {
    const auto star = make_star_mdp(3);
    DiscoveryConfig cfg;
    cfg.method = DiscoveryMethod::orthogonal;
    cfg.max_policies = 3;
    const auto result = run_discovery(star, cfg);
    ASSERT_EQ(result.log.records.size(), 3u);
    for (int k = 0; k < 3; ++k) EXPECT_EQ(result.policies.policy(size_t(k))(0), k);
    EXPECT_NEAR(result.log.records.back().v_bar, -1.0 / std::sqrt(3.0), 1e-9);
    cfg.max_policies = 4;
    EXPECT_THROW(run_discovery(star, cfg), validation_error);
}

TEST(DiscoverBaseline, RandomIsSeededAndRunsFullLength) {
    const auto world = small_grid(8);
    DiscoveryConfig cfg;
    cfg.method = DiscoveryMethod::random;
    cfg.max_policies = 5;
    cfg.rng_seed = 3;
    const auto a = run_discovery(world.mdp, cfg);
    const auto b = run_discovery(world.mdp, cfg);
    ASSERT_EQ(a.log.records.size(), 5u);
    EXPECT_EQ(a.log.stop, StopReason::max_policies);
    for (size_t t = 0; t < 5; ++t) {
        EXPECT_EQ(a.log.records[t].v_bar, b.log.records[t].v_bar);
        if (t > 0) {
            EXPECT_GE(a.log.records[t].v_bar, a.log.records[t - 1].v_bar - 1e-12);
        }
    }
}

TEST(DiscoveryConfig, Validation) {
    DiscoveryConfig cfg;
    cfg.max_policies = 0;
    EXPECT_THROW(cfg.validate(), validation_error);
    cfg.max_policies = 3;
    cfg.improvement_tol = -1.0;
    EXPECT_THROW(cfg.validate(), validation_error);
    EXPECT_THROW(parse_method("greedy"), validation_error);
    EXPECT_EQ(parse_method(to_string(DiscoveryMethod::random)), DiscoveryMethod::random);
}
