#pragma once

#include "smpset/successor_features.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace smpset {

struct CgOptions {
    int max_iterations = 500;
    /// Stop once the Frank-Wolfe gap grad . (x - y) drops below this.
    double tol = 1e-9;
    /// Exact line search instead of the 2/(t+2) schedule.
    bool line_search = false;
    PlannerOptions planner;
};

/// A point of the SF polytope as a convex combination of deterministic policies' SFs.
struct MixedSfPoint {
    Vector point;
    std::vector<double> weights;
    std::vector<DeterministicPolicy> vertices;
    std::vector<Vector> vertex_sfs;
    int iterations = 0;
    double gap = 0.0;
    /// ||x||^2 at the starting vertex and after every step.
    std::vector<double> objective_history;

    double norm() const { return point.norm(); }
    /// w . x for w = -x/||x||, the value of the mixture against its own worst-case reward.
    double worst_case_value() const { return -norm(); }
};

/**
 * Conditional gradient on h(x) = ||x||^2 over the SF polytope. The linear
 * minimization oracle is the planner run on reward -grad h(x) = -2x.
 */
inline MixedSfPoint cg_min_norm(const FeatureMdp& mdp, const CgOptions& options = {}) {
    detail::require(options.max_iterations >= 1, "CG needs at least one iteration");
    detail::require(options.tol >= 0.0, "CG tolerance must be nonnegative");
    const Eigen::Index d = mdp.feature_dim();

    MixedSfPoint out;
    auto add_vertex = [&](DeterministicPolicy pi, const Vector& sf, double weight) {
        for (size_t k = 0; k < out.vertices.size(); ++k) {
            if (out.vertices[k] == pi) {
                out.weights[k] += weight;
                return;
            }
        }
        out.vertices.push_back(std::move(pi));
        out.vertex_sfs.push_back(sf);
        out.weights.push_back(weight);
    };

    {
        const RewardVector w0(Vector::Constant(d, -1.0 / std::sqrt(double(d))));
        DeterministicPolicy start = solve_optimal_policy(mdp, w0, options.planner);
        const Vector sf = compute_sf(mdp, start).aggregate;
        out.point = sf;
        add_vertex(std::move(start), sf, 1.0);
    }
    out.objective_history.push_back(out.point.squaredNorm());

    for (int t = 1; t <= options.max_iterations; ++t) {
        out.iterations = t;
        const Vector grad = 2.0 * out.point;
        DeterministicPolicy pi = solve_optimal_policy(mdp, RewardVector(Vector(-grad)), options.planner);
        const Vector y = compute_sf(mdp, pi).aggregate;
        out.gap = grad.dot(out.point - y);
        if (out.gap < options.tol) break;

        double alpha = 2.0 / (t + 2.0);
        if (options.line_search) {
            const Vector diff = out.point - y;
            alpha = std::clamp(out.point.dot(diff) / diff.squaredNorm(), 0.0, 1.0);
        }
        for (double& weight : out.weights) weight *= 1.0 - alpha;
        out.point = (1.0 - alpha) * out.point + alpha * y;
        add_vertex(std::move(pi), y, alpha);
        out.objective_history.push_back(out.point.squaredNorm());
    }
    return out;
}

} // namespace smpset
