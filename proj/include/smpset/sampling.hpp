#pragma once

#include "smpset/mdp.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace smpset {

using Rng = std::mt19937_64;

/// Standard normal vector.
inline Vector sample_normal(Rng& rng, Eigen::Index dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) v[k] = normal(rng);
    return v;
}

/// Uniform direction on the unit sphere.
inline Vector sample_unit_sphere(Rng& rng, Eigen::Index dim) {
    for (;;) {
        Vector v = sample_normal(rng, dim);
        const double norm = v.norm();
        if (norm > 1e-12) return v / norm;
    }
}

/// Uniform in the unit ball: a uniform direction scaled by U^(1/d).
inline Vector sample_unit_ball(Rng& rng, Eigen::Index dim) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Vector direction = sample_unit_sphere(rng, dim);
    return direction * std::pow(uniform(rng), 1.0 / double(dim));
}

} // namespace smpset
