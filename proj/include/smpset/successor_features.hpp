#pragma once

#include "smpset/mdp.hpp"

namespace smpset {

/// Successor features of a policy, normalized by (1 - gamma).
struct SuccessorFeatures {
    /// (S*A) x d, row s*A + a holds psi(s, a).
    Matrix per_sa;
    /// psi = E_{s ~ D} psi(s, pi(s)).
    Vector aggregate;

    Eigen::Index dim() const { return aggregate.size(); }
};

/**
 * psi(s,a) = (1 - gamma) phi_bar(s,a) + gamma sum_{s'} P(s'|s,a) psi(s', pi(s')).
 *
 * The on-policy values psi(s, pi(s)) come from one LU factorization of
 * (I - gamma P_pi) shared by all d feature columns; the remaining actions
 * are filled in by a single backup.
 */
inline SuccessorFeatures compute_sf(const FeatureMdp& mdp, const DeterministicPolicy& pi) {
    const double gamma = mdp.discount();
    const Matrix on_policy = detail::solve_discounted(mdp.policy_transitions(pi), gamma, mdp.policy_features(pi));

    SuccessorFeatures sf;
    sf.per_sa = (1.0 - gamma) * mdp.expected_features() + gamma * (mdp.transitions() * on_policy);
    for (int s = 0; s < mdp.num_states(); ++s) sf.per_sa.row(mdp.sa(s, pi(s))) = on_policy.row(s);
    sf.aggregate = on_policy.transpose() * mdp.initial_dist();
    return sf;
}

/// psi . w
inline double sf_value(const SuccessorFeatures& sf, const RewardVector& w) {
    detail::require_dim("reward vector", sf.dim(), w.dim());
    return sf.aggregate.dot(w.weights());
}

} // namespace smpset
