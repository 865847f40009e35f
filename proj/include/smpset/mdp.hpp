#pragma once

#include "smpset/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <initializer_list>
#include <limits>
#include <string>
#include <vector>

namespace smpset {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Task weights w of a linear reward r_w(s,a,s') = w . phi(s,a,s').
class RewardVector {
  public:
    RewardVector() = default;

    explicit RewardVector(Vector weights) : weights_(std::move(weights)) {
        detail::require(weights_.allFinite(), "reward vector has non-finite entries");
    }

    RewardVector(std::initializer_list<double> weights)
        : RewardVector(Vector(Eigen::Map<const Vector>(weights.begin(), static_cast<Eigen::Index>(weights.size())))) {}

    /// Checked construction for vectors that must lie in the closed unit ball.
    static RewardVector on_unit_ball(Vector weights, double slack = 1e-9) {
        RewardVector w(std::move(weights));
        detail::require(w.norm() <= 1.0 + slack, "reward vector lies outside the unit ball");
        return w;
    }

    const Vector& weights() const { return weights_; }
    Eigen::Index dim() const { return weights_.size(); }
    double norm() const { return weights_.norm(); }
    double operator[](Eigen::Index k) const { return weights_[k]; }

  private:
    Vector weights_;
};

/// One action per state.
struct DeterministicPolicy {
    std::vector<int> actions;

    DeterministicPolicy() = default;
    explicit DeterministicPolicy(std::vector<int> a) : actions(std::move(a)) {}
    DeterministicPolicy(std::initializer_list<int> a) : actions(a) {}
    DeterministicPolicy(int num_states, int action) : actions(static_cast<size_t>(num_states), action) {}

    int operator()(int state) const { return actions[static_cast<size_t>(state)]; }
    size_t size() const { return actions.size(); }
    friend bool operator==(const DeterministicPolicy&, const DeterministicPolicy&) = default;
};

/// Mutable dense tables used to assemble a FeatureMdp. Layout:
/// transitions[(s*A + a)*S + s'], features[((s*A + a)*S + s')*d + k].
struct MdpTables {
    int num_states = 0;
    int num_actions = 0;
    int feature_dim = 0;
    double discount = 0.9;
    std::vector<double> transitions;
    std::vector<double> features;
    std::vector<double> initial_dist;

    MdpTables() = default;
    MdpTables(int states, int actions, int dim, double gamma)
        : num_states(states), num_actions(actions), feature_dim(dim), discount(gamma),
          transitions(size_t(states) * size_t(actions) * size_t(states), 0.0),
          features(size_t(states) * size_t(actions) * size_t(states) * size_t(dim), 0.0),
          initial_dist(size_t(states), 0.0) {}

    double& p(int s, int a, int next) {
        return transitions[(size_t(s) * size_t(num_actions) + size_t(a)) * size_t(num_states) + size_t(next)];
    }
    double& phi(int s, int a, int next, int k) {
        return features[((size_t(s) * size_t(num_actions) + size_t(a)) * size_t(num_states) + size_t(next)) *
                            size_t(feature_dim) +
                        size_t(k)];
    }
};

/// Reward table over (s, a, s'), same layout as the transition table.
struct RewardTable {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> values;

    double operator()(int s, int a, int next) const {
        return values[(size_t(s) * size_t(num_actions) + size_t(a)) * size_t(num_states) + size_t(next)];
    }
};

/**
 * Tabular MDP whose reward is replaced by a d-dimensional feature map
 * phi(s,a,s') in [0,1]^d. Immutable once constructed.
 *
 * Besides the raw tables, the expected one-step features
 * sum_{s'} P(s'|s,a) phi(s,a,s') are cached as an (S*A) x d matrix; all
 * planners work from that matrix and the (S*A) x S transition matrix.
 */
class FeatureMdp {
  public:
    static constexpr double stochastic_tol = 1e-12;

    explicit FeatureMdp(MdpTables tables) : tables_(std::move(tables)) {
        const auto S = tables_.num_states;
        const auto A = tables_.num_actions;
        const auto d = tables_.feature_dim;
        detail::require(S > 0, "num_states must be positive");
        detail::require(A > 0, "num_actions must be positive");
        detail::require(d > 0, "feature dimension must be positive");
        detail::require(std::isfinite(tables_.discount) && tables_.discount >= 0.0 && tables_.discount < 1.0,
                        "discount must lie in [0, 1)");
        detail::require_dim("transition table size", long(S) * A * S, long(tables_.transitions.size()));
        detail::require_dim("feature table size", long(S) * A * S * d, long(tables_.features.size()));
        detail::require_dim("initial distribution length", S, long(tables_.initial_dist.size()));

        transitions_ = Eigen::Map<const RowMatrix>(tables_.transitions.data(), long(S) * A, S);
        for (Eigen::Index row = 0; row < transitions_.rows(); ++row) {
            const auto r = transitions_.row(row);
            detail::require((r.array() >= 0.0).all() && r.allFinite(),
                            "transition probabilities must be finite and nonnegative");
            detail::require(std::abs(r.sum() - 1.0) <= stochastic_tol,
                            "transition row (s=" + std::to_string(row / A) + ", a=" + std::to_string(row % A) +
                                ") does not sum to 1");
        }
        for (double f : tables_.features) {
            detail::require(std::isfinite(f) && f >= 0.0 && f <= 1.0, "feature values must lie in [0, 1]");
        }
        initial_dist_ = Eigen::Map<const Vector>(tables_.initial_dist.data(), S);
        detail::require((initial_dist_.array() >= 0.0).all() && initial_dist_.allFinite(),
                        "initial distribution must be nonnegative");
        detail::require(std::abs(initial_dist_.sum() - 1.0) <= stochastic_tol,
                        "initial distribution does not sum to 1");

        expected_features_ = Matrix::Zero(long(S) * A, d);
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                for (int next = 0; next < S; ++next) {
                    const double prob = transition(s, a, next);
                    if (prob == 0.0) continue;
                    for (int k = 0; k < d; ++k) {
                        expected_features_(sa(s, a), k) += prob * feature(s, a, next, k);
                    }
                }
            }
        }
    }

    int num_states() const { return tables_.num_states; }
    int num_actions() const { return tables_.num_actions; }
    int feature_dim() const { return tables_.feature_dim; }
    double discount() const { return tables_.discount; }
    const Vector& initial_dist() const { return initial_dist_; }
    const MdpTables& tables() const { return tables_; }

    /// Row index of the pair (s, a) in the (S*A)-row matrices.
    Eigen::Index sa(int s, int a) const { return Eigen::Index(s) * num_actions() + a; }

    double transition(int s, int a, int next) const { return transitions_(sa(s, a), next); }
    double feature(int s, int a, int next, int k) const {
        return tables_.features[(size_t(sa(s, a)) * size_t(num_states()) + size_t(next)) * size_t(feature_dim()) +
                                size_t(k)];
    }

    /// (S*A) x S transition matrix.
    const RowMatrix& transitions() const { return transitions_; }
    /// (S*A) x d expected one-step features.
    const Matrix& expected_features() const { return expected_features_; }

    /// S x S transition matrix of the chain induced by a policy.
    Matrix policy_transitions(const DeterministicPolicy& pi) const {
        validate(pi);
        Matrix P(num_states(), num_states());
        for (int s = 0; s < num_states(); ++s) P.row(s) = transitions_.row(sa(s, pi(s)));
        return P;
    }

    /// S x d expected one-step features under a policy.
    Matrix policy_features(const DeterministicPolicy& pi) const {
        validate(pi);
        Matrix F(num_states(), feature_dim());
        for (int s = 0; s < num_states(); ++s) F.row(s) = expected_features_.row(sa(s, pi(s)));
        return F;
    }

    void validate(const DeterministicPolicy& pi) const {
        detail::require_dim("policy length", num_states(), long(pi.size()));
        for (int a : pi.actions) {
            detail::require(a >= 0 && a < num_actions(), "policy action out of range: " + std::to_string(a));
        }
    }

    void validate(const RewardVector& w) const { detail::require_dim("reward vector", feature_dim(), w.dim()); }

  private:
    MdpTables tables_;
    RowMatrix transitions_;
    Vector initial_dist_;
    Matrix expected_features_;
};

/// Reward table r_w(s,a,s') = w . phi(s,a,s').
inline RewardTable reward_of(const FeatureMdp& mdp, const RewardVector& w) {
    mdp.validate(w);
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const int d = mdp.feature_dim();
    RewardTable table{S, A, std::vector<double>(size_t(S) * size_t(A) * size_t(S), 0.0)};
    const auto& phi = mdp.tables().features;
    for (size_t i = 0; i < table.values.size(); ++i) {
        double r = 0.0;
        for (int k = 0; k < d; ++k) r += phi[i * size_t(d) + size_t(k)] * w[k];
        table.values[i] = r;
    }
    return table;
}

namespace detail {

/// Solves (I - gamma P) X = (1 - gamma) R column by column with one LU factorization.
inline Matrix solve_discounted(const Matrix& P, double discount, const Matrix& R) {
    const Eigen::Index S = P.rows();
    const Matrix system = Matrix::Identity(S, S) - discount * P;
    Eigen::PartialPivLU<Matrix> lu(system);
    Matrix X = lu.solve((1.0 - discount) * R);
    if (!X.allFinite()) throw numerical_error("policy evaluation produced non-finite values");
    return X;
}

} // namespace detail

struct PolicyEvaluation {
    Vector state_values;
    double value = 0.0;
};

/// Normalized values (1 - gamma) E[sum_t gamma^t r_w] per state, and their
/// average under the initial distribution.
inline PolicyEvaluation evaluate_policy(const FeatureMdp& mdp, const DeterministicPolicy& pi, const RewardVector& w) {
    mdp.validate(w);
    const Matrix P = mdp.policy_transitions(pi);
    const Matrix r = mdp.policy_features(pi) * w.weights();
    PolicyEvaluation out;
    out.state_values = detail::solve_discounted(P, mdp.discount(), r).col(0);
    out.value = mdp.initial_dist().dot(out.state_values);
    return out;
}

struct PlannerOptions {
    int max_sweeps = 10000;
    /// Actions whose Q-value is within this of the best count as tied.
    double tie_tol = 1e-12;
};

struct PlannerResult {
    DeterministicPolicy policy;
    Vector state_values;
    int sweeps = 0;
    /// State values of each evaluated policy, in order.
    std::vector<Vector> value_history;
};

namespace detail {

inline DeterministicPolicy greedy_actions(const FeatureMdp& mdp, const Vector& q, double tie_tol) {
    const int A = mdp.num_actions();
    DeterministicPolicy pi(mdp.num_states(), 0);
    for (int s = 0; s < mdp.num_states(); ++s) {
        const auto row = q.segment(mdp.sa(s, 0), A);
        const double best = row.maxCoeff();
        for (int a = 0; a < A; ++a) {
            if (row[a] >= best - tie_tol) {
                pi.actions[size_t(s)] = a;
                break;
            }
        }
    }
    return pi;
}

} // namespace detail

/// Howard policy iteration for reward r_w. Greedy ties go to the lowest action index.
inline PlannerResult policy_iteration(const FeatureMdp& mdp, const RewardVector& w, const PlannerOptions& options = {}) {
    mdp.validate(w);
    const double gamma = mdp.discount();
    const Vector immediate = (1.0 - gamma) * (mdp.expected_features() * w.weights());

    PlannerResult result;
    DeterministicPolicy pi = detail::greedy_actions(mdp, immediate, options.tie_tol);
    for (int sweep = 1;; ++sweep) {
        const Matrix P = mdp.policy_transitions(pi);
        Vector r(mdp.num_states());
        for (int s = 0; s < mdp.num_states(); ++s) r[s] = immediate[mdp.sa(s, pi(s))] / (1.0 - gamma);
        Vector v = detail::solve_discounted(P, gamma, r).col(0);
        result.value_history.push_back(v);

        const Vector q = immediate + gamma * (mdp.transitions() * v);
        DeterministicPolicy next = detail::greedy_actions(mdp, q, options.tie_tol);
        double gain = 0.0;
        for (int s = 0; s < mdp.num_states(); ++s) {
            gain = std::max(gain, q[mdp.sa(s, next(s))] - q[mdp.sa(s, pi(s))]);
        }
        result.sweeps = sweep;
        if (next == pi || gain <= options.tie_tol || sweep >= options.max_sweeps) {
            if (!(next == pi)) {
                // Only tie-level changes remain; report the values of the returned policy.
                Vector rn(mdp.num_states());
                for (int s = 0; s < mdp.num_states(); ++s) rn[s] = immediate[mdp.sa(s, next(s))] / (1.0 - gamma);
                v = detail::solve_discounted(mdp.policy_transitions(next), gamma, rn).col(0);
            }
            result.policy = std::move(next);
            result.state_values = std::move(v);
            return result;
        }
        pi = std::move(next);
    }
}

/// Deterministic optimal policy for reward r_w.
inline DeterministicPolicy solve_optimal_policy(const FeatureMdp& mdp, const RewardVector& w,
                                                const PlannerOptions& options = {}) {
    return policy_iteration(mdp, w, options).policy;
}

} // namespace smpset
