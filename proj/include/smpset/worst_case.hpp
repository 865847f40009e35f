#pragma once

#include "smpset/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace smpset {

struct StepSchedule {
    double initial = 1.0;
    /// step_t = initial / t^decay
    double decay = 0.5;
};

struct SolverConfig {
    int max_iterations = 50000;
    StepSchedule step;
    /// Early stop for the subgradient phase once its primal-dual gap falls below this.
    double convergence_tol = 1e-6;
    double active_tol = 1e-6;
    /// Restrict w to the hyperplane sum_i w_i = 0.
    bool zero_mean = false;
    /// Solve through the per-candidate reformulation instead of subgradient + polish.
    bool use_qp = false;

    void validate() const {
        detail::require(max_iterations >= 1, "solver max_iterations must be at least 1");
        detail::require(step.initial > 0.0 && std::isfinite(step.initial), "solver step size must be positive");
        detail::require(step.decay >= 0.0 && std::isfinite(step.decay), "solver step decay must be nonnegative");
        detail::require(convergence_tol > 0.0, "solver convergence_tol must be positive");
        detail::require(active_tol > 0.0, "solver active_tol must be positive");
    }
};

struct WorstCaseSolution {
    RewardVector w_bar;
    /// max_i w_bar . psi_i
    double value = 0.0;
    std::vector<int> active_indices;
    int solver_iterations = 0;
    /// Every SF (after the zero-mean projection, if enabled) sat at the origin's hull.
    bool degenerate = false;
    /// The min-norm-point polish produced an optimality certificate.
    bool certified = false;
};

/// Rows are the aggregate SF vectors psi_1..psi_n.
using SfMatrix = Matrix;

inline SfMatrix stack_rows(const std::vector<Vector>& rows) {
    detail::require(!rows.empty(), "empty SF list");
    SfMatrix m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
    for (size_t i = 0; i < rows.size(); ++i) {
        detail::require_dim("SF vector", m.cols(), rows[i].size());
        m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    return m;
}

/// max_i w . psi_i
inline double max_linear(const SfMatrix& sfs, const Vector& w) { return (sfs * w).maxCoeff(); }

/// Indices i with w_bar . psi_i >= value - active_tol.
inline std::vector<int> extract_active(const SfMatrix& sfs, const WorstCaseSolution& solution, double active_tol) {
    const Vector scores = sfs * solution.w_bar.weights();
    std::vector<int> active;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        if (scores[i] >= solution.value - active_tol) active.push_back(static_cast<int>(i));
    }
    return active;
}

namespace detail {

inline void check_sfs(const SfMatrix& sfs) {
    require(sfs.rows() >= 1, "empty SF list");
    require(sfs.cols() >= 1, "SF vectors must have positive dimension");
    require(sfs.allFinite(), "SF list contains NaN or infinite entries");
}

/// Removes each row's mean, mapping the problem onto the hyperplane sum w = 0.
inline SfMatrix center_rows(const SfMatrix& sfs) {
    SfMatrix out = sfs;
    out.colwise() -= sfs.rowwise().mean();
    return out;
}

inline Vector center(Vector w) {
    w.array() -= w.mean();
    return w;
}

/**
 * Minimizer for the case where the origin lies in the hull of the
 * (possibly centered) SFs, so the optimal value is 0. For nonnegative SFs
 * without the zero-mean constraint, -1/sqrt(d) reaches it. Otherwise look for
 * a unit direction orthogonal to every SF; failing that, w = 0.
 */
inline Vector degenerate_direction(const SfMatrix& sfs, const SfMatrix& effective, bool zero_mean) {
    const Eigen::Index d = sfs.cols();
    if (!zero_mean) {
        Vector w = Vector::Constant(d, -1.0 / std::sqrt(double(d)));
        if (max_linear(sfs, w) <= 1e-12) return w;
    }
    Matrix constraints(effective.rows() + (zero_mean ? 1 : 0), d);
    constraints.topRows(effective.rows()) = effective;
    if (zero_mean) constraints.bottomRows(1).setOnes();
    Eigen::JacobiSVD<Matrix> svd(constraints, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double scale = std::max(1.0, sv.size() ? sv[0] : 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv[k] > 1e-12 * scale) ++rank;
    }
    if (rank < d) {
        Vector w = svd.matrixV().col(d - 1);
        Eigen::Index lead = 0;
        w.cwiseAbs().maxCoeff(&lead);
        if (w[lead] > 0) w = -w;
        return w.normalized();
    }
    return Vector::Zero(d);
}

/// Affine min-norm combination of the given points (weights sum to 1, any sign).
inline Vector affine_min_norm_weights(const Matrix& points) {
    const Eigen::Index k = points.rows();
    const Matrix gram = points * points.transpose() + Matrix::Ones(k, k);
    Vector raw = gram.completeOrthogonalDecomposition().solve(Vector::Ones(k));
    return raw / raw.sum();
}

struct MinNormPoint {
    Vector point;
    std::vector<int> support;
    Vector weights;
    bool certified = false;
    int iterations = 0;
};

/**
 * Wolfe's minimum-norm-point algorithm on conv{rows of points}, starting
 * from the corral {start}. Certified when x . p_j >= ||x||^2 - eps for all j,
 * which is exactly the optimality condition of the projection of the origin.
 */
inline MinNormPoint wolfe_min_norm(const Matrix& points, int start) {
    const Eigen::Index n = points.rows();
    const double scale = std::max(1e-300, points.rowwise().squaredNorm().maxCoeff());
    const double eps = 1e-13 * scale;
    const int max_major = 50 * int(n + points.cols()) + 100;

    MinNormPoint out;
    std::vector<int> corral{start};
    Vector lambda = Vector::Ones(1);
    Vector x = points.row(start).transpose();

    auto corral_points = [&] {
        Matrix m(static_cast<Eigen::Index>(corral.size()), points.cols());
        for (size_t k = 0; k < corral.size(); ++k) m.row(Eigen::Index(k)) = points.row(corral[k]);
        return m;
    };

    for (int major = 0; major < max_major; ++major) {
        out.iterations = major + 1;
        Eigen::Index j = 0;
        const double lowest = (points * x).minCoeff(&j);
        if (lowest >= x.squaredNorm() - eps) {
            out.certified = true;
            break;
        }
        if (std::find(corral.begin(), corral.end(), int(j)) != corral.end()) break;
        corral.push_back(int(j));
        lambda.conservativeResize(lambda.size() + 1);
        lambda[lambda.size() - 1] = 0.0;

        for (int minor = 0; minor < max_major; ++minor) {
            const Matrix pts = corral_points();
            const Vector alpha = affine_min_norm_weights(pts);
            if ((alpha.array() > 1e-15).all()) {
                lambda = alpha;
                break;
            }
            double theta = 1.0;
            for (Eigen::Index k = 0; k < alpha.size(); ++k) {
                if (alpha[k] <= 1e-15) theta = std::min(theta, lambda[k] / (lambda[k] - alpha[k]));
            }
            lambda = (1.0 - theta) * lambda + theta * alpha;
            std::vector<int> kept;
            std::vector<double> kept_lambda;
            for (Eigen::Index k = 0; k < lambda.size(); ++k) {
                if (lambda[k] > 1e-15) {
                    kept.push_back(corral[size_t(k)]);
                    kept_lambda.push_back(lambda[k]);
                }
            }
            corral = std::move(kept);
            lambda = Eigen::Map<const Vector>(kept_lambda.data(), Eigen::Index(kept_lambda.size()));
            lambda /= lambda.sum();
        }
        x = corral_points().transpose() * lambda;
    }
    out.point = x;
    out.support = corral;
    out.weights = lambda;
    return out;
}

struct SubgradientResult {
    Vector best_w;
    double best_value;
    int iterations;
};

/// Projected subgradient descent on f(w) = max_i w . psi_i over the unit ball.
inline SubgradientResult subgradient_descent(const SfMatrix& effective, const SolverConfig& cfg) {
    const Eigen::Index d = effective.cols();
    Vector start = effective.colwise().mean().transpose();
    Vector w = start.norm() > 0 ? Vector(-start.normalized()) : Vector(Vector::Zero(d));

    SubgradientResult out{w, max_linear(effective, w), 0};
    Vector averaged_grad = Vector::Zero(d);
    double weight_total = 0.0;
    for (int t = 1; t <= cfg.max_iterations; ++t) {
        out.iterations = t;
        const Vector scores = effective * w;
        const double f = scores.maxCoeff();
        if (f < out.best_value) {
            out.best_value = f;
            out.best_w = w;
        }
        Vector grad = Vector::Zero(d);
        int ties = 0;
        for (Eigen::Index i = 0; i < scores.size(); ++i) {
            if (scores[i] >= f - 1e-12) {
                grad += effective.row(i).transpose();
                ++ties;
            }
        }
        grad /= double(ties);

        const double step = cfg.step.initial / std::pow(double(t), cfg.step.decay);
        averaged_grad += step * grad;
        weight_total += step;
        // Every averaged subgradient lies in the hull, so -||average|| bounds the optimum from below.
        const double lower = -(averaged_grad / weight_total).norm();
        if (out.best_value - lower <= cfg.convergence_tol) break;

        w -= step * grad;
        if (cfg.zero_mean) w = center(std::move(w));
        const double norm = w.norm();
        if (norm > 1.0) w /= norm;
    }
    return out;
}

/**
 * Lawson-Hanson nonnegative least squares: min ||M lambda - b|| s.t. lambda >= 0.
 */
inline Vector nnls(const Matrix& M, const Vector& b, int max_iterations = 0) {
    const Eigen::Index m = M.cols();
    if (max_iterations <= 0) max_iterations = 30 * int(m) + 30;
    Vector lambda = Vector::Zero(m);
    std::vector<bool> passive(size_t(m), false);
    const double tol = 1e-14 * std::max(1.0, M.norm() * std::max(1.0, b.norm()));

    auto solve_passive = [&](Vector& z) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index k = 0; k < m; ++k) {
            if (passive[size_t(k)]) idx.push_back(k);
        }
        z = Vector::Zero(m);
        if (idx.empty()) return;
        Matrix sub(M.rows(), Eigen::Index(idx.size()));
        for (size_t k = 0; k < idx.size(); ++k) sub.col(Eigen::Index(k)) = M.col(idx[k]);
        const Vector zs = sub.completeOrthogonalDecomposition().solve(b);
        for (size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zs[Eigen::Index(k)];
    };

    for (int outer = 0; outer < max_iterations; ++outer) {
        const Vector grad = M.transpose() * (b - M * lambda);
        Eigen::Index best = -1;
        double best_grad = tol;
        for (Eigen::Index k = 0; k < m; ++k) {
            if (!passive[size_t(k)] && grad[k] > best_grad) {
                best_grad = grad[k];
                best = k;
            }
        }
        if (best < 0) break;
        passive[size_t(best)] = true;

        for (int inner = 0; inner < max_iterations; ++inner) {
            Vector z;
            solve_passive(z);
            bool feasible = true;
            for (Eigen::Index k = 0; k < m; ++k) {
                if (passive[size_t(k)] && z[k] <= 0.0) feasible = false;
            }
            if (feasible) {
                lambda = z;
                break;
            }
            double alpha = 1.0;
            for (Eigen::Index k = 0; k < m; ++k) {
                if (passive[size_t(k)] && z[k] <= 0.0) alpha = std::min(alpha, lambda[k] / (lambda[k] - z[k]));
            }
            lambda += alpha * (z - lambda);
            for (Eigen::Index k = 0; k < m; ++k) {
                if (passive[size_t(k)] && lambda[k] <= 1e-15) {
                    passive[size_t(k)] = false;
                    lambda[k] = 0.0;
                }
            }
        }
    }
    return lambda;
}

inline WorstCaseSolution finish(const SfMatrix& sfs, Vector w, const SolverConfig& cfg) {
    WorstCaseSolution sol;
    sol.value = max_linear(sfs, w);
    sol.w_bar = RewardVector(std::move(w));
    sol.active_indices = extract_active(sfs, sol, cfg.active_tol);
    return sol;
}

} // namespace detail

/**
 * Worst-case reward of a policy set: argmin over ||w|| <= 1 of max_i w . psi_i.
 *
 * Runs projected subgradient descent (step c/t^decay, averaged subgradient
 * over tied maximizers), then polishes with a minimum-norm-point solve on the
 * SF hull warm-started at the subgradient's top policy: the optimum is
 * w = -x/||x|| for x the point of the hull nearest the origin, with value
 * -||x||. If the polish cannot certify optimality, the reformulated
 * per-policy problem is solved as well and the best objective wins.
 */
inline WorstCaseSolution solve_worst_case_qp(const SfMatrix& sfs, const SolverConfig& cfg = {});

inline WorstCaseSolution solve_worst_case(const SfMatrix& sfs, const SolverConfig& cfg = {}) {
    detail::check_sfs(sfs);
    cfg.validate();
    const SfMatrix effective = cfg.zero_mean ? detail::center_rows(sfs) : sfs;

    const auto sub = detail::subgradient_descent(effective, cfg);
    Vector best_w = sub.best_w;
    double best_value = max_linear(sfs, best_w);

    Eigen::Index top = 0;
    (effective * best_w).maxCoeff(&top);
    const auto mnp = detail::wolfe_min_norm(effective, int(top));
    const double radius = mnp.point.norm();
    const bool degenerate = radius <= 1e-12 * std::max(1.0, effective.norm());

    Vector polished = degenerate ? detail::degenerate_direction(sfs, effective, cfg.zero_mean)
                                 : Vector(-mnp.point / radius);
    if (cfg.zero_mean && !degenerate) polished = detail::center(std::move(polished)).normalized();
    const double polished_value = max_linear(sfs, polished);
    if (polished_value <= best_value + 1e-12) {
        best_w = polished;
        best_value = polished_value;
    }

    WorstCaseSolution sol;
    const bool certified = mnp.certified || degenerate;
    if (!certified) {
        auto alt = solve_worst_case_qp(sfs, cfg);
        if (alt.value < best_value) best_w = alt.w_bar.weights();
    }
    sol = detail::finish(sfs, std::move(best_w), cfg);
    sol.solver_iterations = sub.iterations;
    sol.degenerate = degenerate;
    sol.certified = certified;
    return sol;
}

inline WorstCaseSolution solve_worst_case(const std::vector<Vector>& sfs, const SolverConfig& cfg = {}) {
    return solve_worst_case(stack_rows(sfs), cfg);
}

/**
 * Reformulated worst-case solve. For each policy i, minimize w . psi_i over
 * the ball restricted to the cone where psi_i is a maximizer,
 * w . (psi_j - psi_i) <= 0; the overall solution is the best candidate.
 *
 * Each candidate is solved through its Lagrangian dual, which reduces to the
 * nonnegative least-squares problem min_{lambda >= 0} ||psi_i + sum_j
 * lambda_j (psi_j - psi_i)||; the primal solution is w_i = -z/||z|| for the
 * residual z.
 */
inline WorstCaseSolution solve_worst_case_qp(const SfMatrix& sfs, const SolverConfig& cfg) {
    detail::check_sfs(sfs);
    cfg.validate();
    const SfMatrix effective = cfg.zero_mean ? detail::center_rows(sfs) : sfs;
    const Eigen::Index n = effective.rows();
    const Eigen::Index d = effective.cols();

    Vector best_w;
    double best_value = std::numeric_limits<double>::infinity();
    bool any_zero = false;
    int iterations = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector anchor = effective.row(i).transpose();
        Vector residual = anchor;
        if (n > 1) {
            Matrix directions(d, n - 1);
            for (Eigen::Index j = 0, col = 0; j < n; ++j) {
                if (j != i) directions.col(col++) = (effective.row(j) - effective.row(i)).transpose();
            }
            const Vector lambda = detail::nnls(directions, -anchor);
            residual = anchor + directions * lambda;
        }
        ++iterations;
        const double radius = residual.norm();
        if (radius <= 1e-12 * std::max(1.0, effective.norm())) {
            any_zero = true;
            continue;
        }
        Vector w = -residual / radius;
        if (cfg.zero_mean) w = detail::center(std::move(w)).normalized();
        const double value = max_linear(sfs, w);
        if (value < best_value) {
            best_value = value;
            best_w = std::move(w);
        }
    }
    if (any_zero) {
        Vector w = detail::degenerate_direction(sfs, effective, cfg.zero_mean);
        if (max_linear(sfs, w) <= best_value) best_w = std::move(w);
    }
    auto sol = detail::finish(sfs, std::move(best_w), cfg);
    sol.solver_iterations = iterations;
    sol.degenerate = any_zero;
    sol.certified = true;
    return sol;
}

inline WorstCaseSolution solve_worst_case_qp(const std::vector<Vector>& sfs, const SolverConfig& cfg = {}) {
    return solve_worst_case_qp(stack_rows(sfs), cfg);
}

/// Runs whichever solver cfg.use_qp selects.
inline WorstCaseSolution solve_configured(const SfMatrix& sfs, const SolverConfig& cfg) {
    return cfg.use_qp ? solve_worst_case_qp(sfs, cfg) : solve_worst_case(sfs, cfg);
}

} // namespace smpset
