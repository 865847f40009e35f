#pragma once

#include "smpset/successor_features.hpp"
#include "smpset/worst_case.hpp"

#include <vector>

namespace smpset {

/// Ordered policies with their successor features, all over one MDP's (S, A, d).
class PolicySet {
  public:
    PolicySet(int num_states, int num_actions, int feature_dim)
        : num_states_(num_states), num_actions_(num_actions), feature_dim_(feature_dim) {
        detail::require(num_states > 0 && num_actions > 0 && feature_dim > 0, "policy set dimensions must be positive");
    }

    explicit PolicySet(const FeatureMdp& mdp) : PolicySet(mdp.num_states(), mdp.num_actions(), mdp.feature_dim()) {}

    void add(DeterministicPolicy pi, SuccessorFeatures sf) {
        detail::require_dim("policy length", num_states_, long(pi.size()));
        for (int a : pi.actions) detail::require(a >= 0 && a < num_actions_, "policy action out of range");
        detail::require_dim("SF dimension", feature_dim_, sf.dim());
        policies_.push_back(std::move(pi));
        sfs_.push_back(std::move(sf));
    }

    /// Plans nothing; computes the SF of pi on mdp and appends.
    void add(const FeatureMdp& mdp, DeterministicPolicy pi) {
        auto sf = compute_sf(mdp, pi);
        add(std::move(pi), std::move(sf));
    }

    size_t size() const { return policies_.size(); }
    bool empty() const { return policies_.empty(); }
    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    int feature_dim() const { return feature_dim_; }

    const std::vector<DeterministicPolicy>& policies() const { return policies_; }
    const std::vector<SuccessorFeatures>& sfs() const { return sfs_; }
    const DeterministicPolicy& policy(size_t i) const { return policies_[i]; }
    const SuccessorFeatures& sf(size_t i) const { return sfs_[i]; }

    /// n x d matrix of aggregate SFs.
    SfMatrix sf_matrix() const {
        detail::require(!empty(), "policy set is empty");
        SfMatrix m(Eigen::Index(size()), feature_dim_);
        for (size_t i = 0; i < size(); ++i) m.row(Eigen::Index(i)) = sfs_[i].aggregate.transpose();
        return m;
    }

    PolicySet subset(const std::vector<int>& indices) const {
        PolicySet out(num_states_, num_actions_, feature_dim_);
        for (int i : indices) {
            detail::require(i >= 0 && size_t(i) < size(), "subset index out of range");
            out.add(policies_[size_t(i)], sfs_[size_t(i)]);
        }
        return out;
    }

  private:
    int num_states_;
    int num_actions_;
    int feature_dim_;
    std::vector<DeterministicPolicy> policies_;
    std::vector<SuccessorFeatures> sfs_;
};

struct SmpChoice {
    int index = 0;
    double value = 0.0;
};

/// The set-max policy's choice for task w: the constituent with the best psi . w.
inline SmpChoice smp_select(const PolicySet& set, const RewardVector& w) {
    detail::require(!set.empty(), "SMP over an empty policy set");
    detail::require_dim("reward vector", set.feature_dim(), w.dim());
    SmpChoice best{0, set.sf(0).aggregate.dot(w.weights())};
    for (size_t i = 1; i < set.size(); ++i) {
        const double v = set.sf(i).aggregate.dot(w.weights());
        if (v > best.value) best = {int(i), v};
    }
    return best;
}

inline double smp_value(const PolicySet& set, const RewardVector& w) { return smp_select(set, w).value; }

/// GPI: in each state act greedily on max_i psi_i(s,a) . w; ties go to the lowest action.
inline DeterministicPolicy gpi_policy(const FeatureMdp& mdp, const PolicySet& set, const RewardVector& w) {
    detail::require(!set.empty(), "GPI over an empty policy set");
    detail::require_dim("policy set states", mdp.num_states(), set.num_states());
    detail::require_dim("policy set actions", mdp.num_actions(), set.num_actions());
    detail::require_dim("policy set features", mdp.feature_dim(), set.feature_dim());
    detail::require_dim("reward vector", mdp.feature_dim(), w.dim());

    Vector q = set.sf(0).per_sa * w.weights();
    for (size_t i = 1; i < set.size(); ++i) q = q.cwiseMax(set.sf(i).per_sa * w.weights());
    return detail::greedy_actions(mdp, q, 0.0);
}

/// Value of the GPI policy for task w, from the initial distribution.
inline double gpi_value(const FeatureMdp& mdp, const PolicySet& set, const RewardVector& w) {
    return evaluate_policy(mdp, gpi_policy(mdp, set, w), w).value;
}

/**
 * Bracket on GPI's worst-case value, both evaluated at the SMP worst-case
 * reward: lower = w_bar . psi(SMP) = v_bar, upper = w_bar . psi(GPI(w_bar)).
 */
struct GpiBracket {
    double lower = 0.0;
    double upper = 0.0;
};

inline GpiBracket gpi_bracket(const FeatureMdp& mdp, const PolicySet& set, const WorstCaseSolution& solution) {
    return {smp_value(set, solution.w_bar), gpi_value(mdp, set, solution.w_bar)};
}

} // namespace smpset
