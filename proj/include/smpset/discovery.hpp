#pragma once

#include "smpset/composition.hpp"
#include "smpset/sampling.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace smpset {

enum class DiscoveryMethod { worst_case, orthogonal, random };

inline std::string to_string(DiscoveryMethod m) {
    switch (m) {
    case DiscoveryMethod::worst_case: return "worst_case";
    case DiscoveryMethod::orthogonal: return "orthogonal";
    case DiscoveryMethod::random: return "random";
    }
    return "unknown";
}

inline DiscoveryMethod parse_method(const std::string& name) {
    if (name == "worst_case") return DiscoveryMethod::worst_case;
    if (name == "orthogonal") return DiscoveryMethod::orthogonal;
    if (name == "random") return DiscoveryMethod::random;
    throw validation_error("unknown discovery method '" + name + "' (expected worst_case, orthogonal or random)");
}

struct DiscoveryConfig {
    int max_policies = 12;
    double improvement_tol = 1e-8;
    std::uint64_t rng_seed = 0;
    bool prune_inactive = false;
    DiscoveryMethod method = DiscoveryMethod::worst_case;
    SolverConfig solver;
    PlannerOptions planner;

    void validate() const {
        detail::require(max_policies >= 1, "max_policies must be at least 1");
        detail::require(improvement_tol >= 0.0 && std::isfinite(improvement_tol), "improvement_tol must be >= 0");
        solver.validate();
    }
};

struct DiscoveryRecord {
    int iteration = 0;
    RewardVector w_bar;
    double v_bar = 0.0;
    /// Value under w_bar of the planner's best response to w_bar.
    double new_policy_value = 0.0;
    int active_count = 0;
    int set_size = 0;
};

enum class StopReason { converged, max_policies };

struct DiscoveryLog {
    std::vector<DiscoveryRecord> records;
    StopReason stop = StopReason::max_policies;
};

struct DiscoveryResult {
    PolicySet policies;
    DiscoveryLog log;
};

/// Observer called once per iteration with the set the record was computed on.
using IterationObserver =
    std::function<void(const PolicySet& set, const WorstCaseSolution& solution, const DiscoveryRecord& record)>;

/// Keeps only the active policies of a solved set.
inline PolicySet prune_active(const PolicySet& set, const WorstCaseSolution& solution) {
    return set.subset(solution.active_indices);
}

/**
 * Worst-case policy iteration. Starts from the optimal policy for a
 * standard-normal reward, then repeatedly solves for the worst-case reward
 * w_bar of the current set and adds the planner's best response to it,
 * stopping once that response no longer beats v_bar by more than
 * improvement_tol or the set reaches max_policies.
 */
inline DiscoveryResult discover(const FeatureMdp& mdp, const DiscoveryConfig& cfg,
                                const IterationObserver& observer = {}) {
    cfg.validate();
    detail::require(cfg.method == DiscoveryMethod::worst_case, "discover() runs the worst_case method only");
    Rng rng(cfg.rng_seed);
    const RewardVector initial(sample_normal(rng, mdp.feature_dim()));

    DiscoveryResult result{PolicySet(mdp), {}};
    result.policies.add(mdp, solve_optimal_policy(mdp, initial, cfg.planner));

    for (int t = 1;; ++t) {
        WorstCaseSolution sol = solve_configured(result.policies.sf_matrix(), cfg.solver);

        DiscoveryRecord rec;
        rec.iteration = t;
        rec.w_bar = sol.w_bar;
        rec.v_bar = sol.value;
        rec.active_count = int(sol.active_indices.size());
        rec.set_size = int(result.policies.size());

        DeterministicPolicy response = solve_optimal_policy(mdp, sol.w_bar, cfg.planner);
        SuccessorFeatures response_sf = compute_sf(mdp, response);
        rec.new_policy_value = sf_value(response_sf, sol.w_bar);

        if (observer) observer(result.policies, sol, rec);
        result.log.records.push_back(rec);

        if (rec.new_policy_value <= rec.v_bar + cfg.improvement_tol) {
            result.log.stop = StopReason::converged;
            break;
        }
        if (result.policies.size() >= size_t(cfg.max_policies)) {
            result.log.stop = StopReason::max_policies;
            break;
        }
        if (cfg.prune_inactive) result.policies = prune_active(result.policies, sol);
        result.policies.add(std::move(response), std::move(response_sf));
    }
    return result;
}

/**
 * Baselines that pick training rewards without looking at the set:
 * orthogonal trains on e_t at iteration t, random on a normalized
 * standard-normal draw. The worst-case reward is only evaluated and logged.
 */
inline DiscoveryResult discover_baseline(const FeatureMdp& mdp, const DiscoveryConfig& cfg,
                                         const IterationObserver& observer = {}) {
    cfg.validate();
    detail::require(cfg.method != DiscoveryMethod::worst_case, "discover_baseline() needs orthogonal or random");
    const int d = mdp.feature_dim();
    if (cfg.method == DiscoveryMethod::orthogonal) {
        detail::require(cfg.max_policies <= d, "orthogonal baseline supports at most d = " + std::to_string(d) +
                                                   " iterations, got " + std::to_string(cfg.max_policies));
    }
    Rng rng(cfg.rng_seed);
    DiscoveryResult result{PolicySet(mdp), {}};
    for (int t = 1; t <= cfg.max_policies; ++t) {
        Vector w_train;
        if (cfg.method == DiscoveryMethod::orthogonal) {
            w_train = Vector::Unit(d, t - 1);
        } else {
            w_train = sample_unit_sphere(rng, d);
        }
        result.policies.add(mdp, solve_optimal_policy(mdp, RewardVector(w_train), cfg.planner));

        const WorstCaseSolution sol = solve_configured(result.policies.sf_matrix(), cfg.solver);
        DiscoveryRecord rec;
        rec.iteration = t;
        rec.w_bar = sol.w_bar;
        rec.v_bar = sol.value;
        rec.active_count = int(sol.active_indices.size());
        rec.set_size = int(result.policies.size());
        rec.new_policy_value =
            sf_value(compute_sf(mdp, solve_optimal_policy(mdp, sol.w_bar, cfg.planner)), sol.w_bar);
        if (observer) observer(result.policies, sol, rec);
        result.log.records.push_back(rec);
    }
    result.log.stop = StopReason::max_policies;
    return result;
}

/// Dispatches on cfg.method.
inline DiscoveryResult run_discovery(const FeatureMdp& mdp, const DiscoveryConfig& cfg,
                                     const IterationObserver& observer = {}) {
    return cfg.method == DiscoveryMethod::worst_case ? discover(mdp, cfg, observer)
                                                     : discover_baseline(mdp, cfg, observer);
}

} // namespace smpset
