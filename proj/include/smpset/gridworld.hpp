#pragma once

#include "smpset/mdp.hpp"
#include "smpset/sampling.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace smpset {

enum class StartDistribution { empty_cells, all_cells };

struct GridSpec {
    int width = 10;
    int height = 10;
    int num_item_classes = 4;
    int items_per_class = 3;
    double discount = 0.9;
    std::uint64_t rng_seed = 0;
    StartDistribution start = StartDistribution::empty_cells;

    int feature_dim() const { return num_item_classes + 1; }
    int num_cells() const { return width * height; }

    void validate() const {
        detail::require(width >= 1 && height >= 1, "grid width and height must be positive");
        detail::require(num_item_classes >= 0 && items_per_class >= 0, "item counts must be nonnegative");
        detail::require(num_item_classes * items_per_class <= num_cells(),
                        "grid too small: " + std::to_string(num_item_classes * items_per_class) + " items for " +
                            std::to_string(num_cells()) + " cells");
        detail::require(discount >= 0.0 && discount < 1.0, "discount must lie in [0, 1)");
        if (start == StartDistribution::empty_cells) {
            detail::require(num_item_classes * items_per_class < num_cells(),
                            "no empty cell left for the start distribution");
        }
    }
};

enum GridAction : int { up = 0, down = 1, left = 2, right = 3 };

/// Grid MDP together with its item layout.
struct GridWorld {
    GridSpec spec;
    /// Item class per cell, -1 for no item. Cell index = row * width + col.
    std::vector<int> items;
    FeatureMdp mdp;

    int cell(int row, int col) const { return row * spec.width + col; }
    std::pair<int, int> coords(int cell_index) const { return {cell_index / spec.width, cell_index % spec.width}; }
};

inline int grid_step(const GridSpec& spec, int cell_index, int action) {
    int row = cell_index / spec.width;
    int col = cell_index % spec.width;
    switch (action) {
    case up: row = std::max(0, row - 1); break;
    case down: row = std::min(spec.height - 1, row + 1); break;
    case left: col = std::max(0, col - 1); break;
    case right: col = std::min(spec.width - 1, col + 1); break;
    default: throw validation_error("grid action out of range");
    }
    return row * spec.width + col;
}

/**
 * Grid world with persistent items. Moves are deterministic and bumping a
 * wall leaves the agent in place. phi(s,a,s') depends on the landing cell:
 * e_k for an item of class k, e_{d-1} (the last coordinate) for no item.
 */
inline GridWorld generate(const GridSpec& spec) {
    spec.validate();
    const int cells = spec.num_cells();
    const int d = spec.feature_dim();

    Rng rng(spec.rng_seed);
    std::vector<int> order(static_cast<size_t>(cells));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> items(size_t(cells), -1);
    for (int k = 0; k < spec.num_item_classes; ++k) {
        for (int j = 0; j < spec.items_per_class; ++j) items[size_t(order[size_t(k * spec.items_per_class + j)])] = k;
    }

    MdpTables t(cells, 4, d, spec.discount);
    for (int s = 0; s < cells; ++s) {
        for (int a = 0; a < 4; ++a) {
            const int next = grid_step(spec, s, a);
            t.p(s, a, next) = 1.0;
            const int item = items[size_t(next)];
            t.phi(s, a, next, item >= 0 ? item : d - 1) = 1.0;
        }
    }
    int starts = 0;
    for (int s = 0; s < cells; ++s) {
        if (spec.start == StartDistribution::all_cells || items[size_t(s)] < 0) ++starts;
    }
    for (int s = 0; s < cells; ++s) {
        if (spec.start == StartDistribution::all_cells || items[size_t(s)] < 0) t.initial_dist[size_t(s)] = 1.0 / starts;
    }
    return GridWorld{spec, std::move(items), FeatureMdp(std::move(t))};
}

/// Item class markers; classes past the fourth use letters.
inline char item_marker(int item_class) {
    static const std::string markers = "8OXYABCDEFGHIJKLMNPQRSTUVWZ";
    return item_class < int(markers.size()) ? markers[size_t(item_class)] : '#';
}

/// One text row per grid row, '.' for empty cells.
inline std::string render_ascii(const GridWorld& world) {
    std::string out;
    for (int row = 0; row < world.spec.height; ++row) {
        for (int col = 0; col < world.spec.width; ++col) {
            const int item = world.items[size_t(world.cell(row, col))];
            out += item >= 0 ? item_marker(item) : '.';
        }
        out += '\n';
    }
    return out;
}

/// Cells visited by a policy from start_cell, including the start, for the given number of steps.
inline std::vector<int> greedy_trajectory(const GridWorld& world, const DeterministicPolicy& pi, int start_cell,
                                          int steps) {
    world.mdp.validate(pi);
    detail::require(start_cell >= 0 && start_cell < world.spec.num_cells(), "trajectory start outside the grid");
    std::vector<int> path{start_cell};
    int s = start_cell;
    for (int t = 0; t < steps; ++t) {
        s = grid_step(world.spec, s, pi(s));
        path.push_back(s);
    }
    return path;
}

/**
 * Star MDP: a center state with one action per arm; arm k is absorbing and
 * every transition into it emits e_k. Starting at the center, the policy that
 * picks arm k has SF exactly e_k.
 */
inline FeatureMdp make_star_mdp(int arms, double discount = 0.9) {
    detail::require(arms >= 1, "star MDP needs at least one arm");
    const int S = arms + 1;
    MdpTables t(S, arms, arms, discount);
    for (int a = 0; a < arms; ++a) {
        t.p(0, a, a + 1) = 1.0;
        t.phi(0, a, a + 1, a) = 1.0;
        for (int k = 0; k < arms; ++k) {
            t.p(k + 1, a, k + 1) = 1.0;
            t.phi(k + 1, a, k + 1, k) = 1.0;
        }
    }
    t.initial_dist[0] = 1.0;
    return FeatureMdp(std::move(t));
}

} // namespace smpset
