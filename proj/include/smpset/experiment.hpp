#pragma once

#include "smpset/apprenticeship.hpp"
#include "smpset/discovery.hpp"
#include "smpset/gridworld.hpp"
#include "smpset/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace smpset {

enum class MdpSource { gridworld, star, file };

struct EvaluationConfig {
    int num_test_rewards = 500;
    int num_seeds = 10;
    /// GPI needs one policy evaluation per reward, so it only sees the first few test rewards.
    int gpi_test_rewards = 50;
    int max_set_size = 10;
    std::vector<DiscoveryMethod> methods{DiscoveryMethod::worst_case, DiscoveryMethod::orthogonal,
                                         DiscoveryMethod::random};
};

struct ExperimentConfig {
    MdpSource source = MdpSource::gridworld;
    GridSpec grid;
    int star_arms = 4;
    double star_discount = 0.9;
    std::string mdp_path;
    DiscoveryConfig discovery;
    EvaluationConfig evaluation;
    CgOptions apprenticeship;
    int trajectory_steps = 20;
    std::string output_dir = "out";

    void validate() const {
        if (source == MdpSource::gridworld) grid.validate();
        if (source == MdpSource::star) {
            detail::require(star_arms >= 1, "mdp.star.arms must be at least 1");
            detail::require(star_discount >= 0.0 && star_discount < 1.0, "mdp.star.discount must lie in [0, 1)");
        }
        if (source == MdpSource::file) {
            detail::require(!mdp_path.empty(), "mdp.path is required when mdp.source is 'file'");
            detail::require(std::filesystem::exists(mdp_path), "mdp.path does not exist: " + mdp_path);
        }
        discovery.validate();
        detail::require(evaluation.num_test_rewards >= 1, "evaluation.num_test_rewards must be at least 1");
        detail::require(evaluation.num_seeds >= 1, "evaluation.num_seeds must be at least 1");
        detail::require(evaluation.gpi_test_rewards >= 0, "evaluation.gpi_test_rewards must be nonnegative");
        detail::require(evaluation.max_set_size >= 1, "evaluation.max_set_size must be at least 1");
        detail::require(!evaluation.methods.empty(), "evaluation.methods must not be empty");
        detail::require(apprenticeship.max_iterations >= 1, "apprenticeship.max_iterations must be at least 1");
        detail::require(apprenticeship.tol >= 0.0, "apprenticeship.tol must be nonnegative");
        detail::require(trajectory_steps >= 0, "trajectory_steps must be nonnegative");
        detail::require(!output_dir.empty(), "output must not be empty");
    }
};

// ---------------------------------------------------------------- config file

namespace detail {

/// Reads one JSON object, rejecting keys nobody asked for.
class ConfigReader {
  public:
    ConfigReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        require(j.is_object(), (path_.empty() ? std::string("config") : path_) + " must be a JSON object");
    }

    void read(const char* key, int& out) {
        if (const json* v = find(key)) {
            require(v->is_number_integer(), where(key) + " must be an integer");
            out = v->get<int>();
        }
    }
    void read(const char* key, std::uint64_t& out) {
        if (const json* v = find(key)) {
            require(v->is_number_unsigned() || (v->is_number_integer() && v->get<long long>() >= 0),
                    where(key) + " must be a nonnegative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void read(const char* key, double& out) {
        if (const json* v = find(key)) {
            require(v->is_number(), where(key) + " must be a number");
            out = v->get<double>();
        }
    }
    void read(const char* key, bool& out) {
        if (const json* v = find(key)) {
            require(v->is_boolean(), where(key) + " must be true or false");
            out = v->get<bool>();
        }
    }
    void read(const char* key, std::string& out) {
        if (const json* v = find(key)) {
            require(v->is_string(), where(key) + " must be a string");
            out = v->get<std::string>();
        }
    }
    const json* child(const char* key) { return find(key); }
    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto& item : j_.items()) {
            require(seen_.count(item.key()) > 0, "unknown config key '" + where(item.key()) + "'");
        }
    }

  private:
    const json* find(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline std::string to_string(MdpSource s) {
    switch (s) {
    case MdpSource::gridworld: return "gridworld";
    case MdpSource::star: return "star";
    case MdpSource::file: return "file";
    }
    return "unknown";
}

inline std::string to_string(StartDistribution s) {
    return s == StartDistribution::empty_cells ? "empty_cells" : "all_cells";
}

} // namespace detail

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    detail::ConfigReader root(j, "");

    if (const json* m = root.child("mdp")) {
        detail::ConfigReader r(*m, "mdp");
        std::string source = detail::to_string(cfg.source);
        r.read("source", source);
        if (source == "gridworld") cfg.source = MdpSource::gridworld;
        else if (source == "star") cfg.source = MdpSource::star;
        else if (source == "file") cfg.source = MdpSource::file;
        else throw validation_error("mdp.source must be gridworld, star or file, got '" + source + "'");
        r.read("path", cfg.mdp_path);
        if (const json* g = r.child("gridworld")) {
            detail::ConfigReader gr(*g, "mdp.gridworld");
            gr.read("width", cfg.grid.width);
            gr.read("height", cfg.grid.height);
            gr.read("num_item_classes", cfg.grid.num_item_classes);
            gr.read("items_per_class", cfg.grid.items_per_class);
            gr.read("discount", cfg.grid.discount);
            gr.read("seed", cfg.grid.rng_seed);
            std::string start = detail::to_string(cfg.grid.start);
            gr.read("start", start);
            if (start == "empty_cells") cfg.grid.start = StartDistribution::empty_cells;
            else if (start == "all_cells") cfg.grid.start = StartDistribution::all_cells;
            else throw validation_error("mdp.gridworld.start must be empty_cells or all_cells, got '" + start + "'");
            gr.finish();
        }
        if (const json* s = r.child("star")) {
            detail::ConfigReader sr(*s, "mdp.star");
            sr.read("arms", cfg.star_arms);
            sr.read("discount", cfg.star_discount);
            sr.finish();
        }
        r.finish();
    }
    if (const json* d = root.child("discovery")) {
        detail::ConfigReader r(*d, "discovery");
        std::string method = to_string(cfg.discovery.method);
        r.read("method", method);
        cfg.discovery.method = parse_method(method);
        r.read("max_policies", cfg.discovery.max_policies);
        r.read("improvement_tol", cfg.discovery.improvement_tol);
        r.read("seed", cfg.discovery.rng_seed);
        r.read("prune_inactive", cfg.discovery.prune_inactive);
        r.finish();
    }
    if (const json* s = root.child("solver")) {
        detail::ConfigReader r(*s, "solver");
        auto& sc = cfg.discovery.solver;
        r.read("max_iterations", sc.max_iterations);
        r.read("step_initial", sc.step.initial);
        r.read("step_decay", sc.step.decay);
        r.read("convergence_tol", sc.convergence_tol);
        r.read("active_tol", sc.active_tol);
        r.read("zero_mean", sc.zero_mean);
        r.read("use_qp", sc.use_qp);
        r.finish();
    }
    if (const json* p = root.child("planner")) {
        detail::ConfigReader r(*p, "planner");
        r.read("max_sweeps", cfg.discovery.planner.max_sweeps);
        r.read("tie_tol", cfg.discovery.planner.tie_tol);
        r.finish();
    }
    if (const json* e = root.child("evaluation")) {
        detail::ConfigReader r(*e, "evaluation");
        r.read("num_test_rewards", cfg.evaluation.num_test_rewards);
        r.read("num_seeds", cfg.evaluation.num_seeds);
        r.read("gpi_test_rewards", cfg.evaluation.gpi_test_rewards);
        r.read("max_set_size", cfg.evaluation.max_set_size);
        if (const json* methods = r.child("methods")) {
            detail::require(methods->is_array(), "evaluation.methods must be an array of method names");
            cfg.evaluation.methods.clear();
            for (const auto& name : *methods) {
                detail::require(name.is_string(), "evaluation.methods must contain strings");
                cfg.evaluation.methods.push_back(parse_method(name.get<std::string>()));
            }
        }
        r.finish();
    }
    if (const json* a = root.child("apprenticeship")) {
        detail::ConfigReader r(*a, "apprenticeship");
        r.read("max_iterations", cfg.apprenticeship.max_iterations);
        r.read("tol", cfg.apprenticeship.tol);
        r.read("line_search", cfg.apprenticeship.line_search);
        r.finish();
    }
    root.read("trajectory_steps", cfg.trajectory_steps);
    root.read("output", cfg.output_dir);
    root.finish();
    cfg.apprenticeship.planner = cfg.discovery.planner;
    return cfg;
}

/// Every field, defaults included; this is what the manifest hashes.
inline json config_to_json(const ExperimentConfig& cfg) {
    json methods = json::array();
    for (auto m : cfg.evaluation.methods) methods.push_back(to_string(m));
    const auto& sc = cfg.discovery.solver;
    return json{
        {"mdp",
         {{"source", detail::to_string(cfg.source)},
          {"path", cfg.mdp_path},
          {"gridworld",
           {{"width", cfg.grid.width},
            {"height", cfg.grid.height},
            {"num_item_classes", cfg.grid.num_item_classes},
            {"items_per_class", cfg.grid.items_per_class},
            {"discount", cfg.grid.discount},
            {"seed", cfg.grid.rng_seed},
            {"start", detail::to_string(cfg.grid.start)}}},
          {"star", {{"arms", cfg.star_arms}, {"discount", cfg.star_discount}}}}},
        {"discovery",
         {{"method", to_string(cfg.discovery.method)},
          {"max_policies", cfg.discovery.max_policies},
          {"improvement_tol", cfg.discovery.improvement_tol},
          {"seed", cfg.discovery.rng_seed},
          {"prune_inactive", cfg.discovery.prune_inactive}}},
        {"solver",
         {{"max_iterations", sc.max_iterations},
          {"step_initial", sc.step.initial},
          {"step_decay", sc.step.decay},
          {"convergence_tol", sc.convergence_tol},
          {"active_tol", sc.active_tol},
          {"zero_mean", sc.zero_mean},
          {"use_qp", sc.use_qp}}},
        {"planner", {{"max_sweeps", cfg.discovery.planner.max_sweeps}, {"tie_tol", cfg.discovery.planner.tie_tol}}},
        {"evaluation",
         {{"num_test_rewards", cfg.evaluation.num_test_rewards},
          {"num_seeds", cfg.evaluation.num_seeds},
          {"gpi_test_rewards", cfg.evaluation.gpi_test_rewards},
          {"max_set_size", cfg.evaluation.max_set_size},
          {"methods", methods}}},
        {"apprenticeship",
         {{"max_iterations", cfg.apprenticeship.max_iterations},
          {"tol", cfg.apprenticeship.tol},
          {"line_search", cfg.apprenticeship.line_search}}},
        {"trajectory_steps", cfg.trajectory_steps},
        {"output", cfg.output_dir},
    };
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    return config_from_json(parse_json(read_text_file(path), path.string()));
}

/// Command-line flags layered over the config file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<DiscoveryMethod> method;
    bool zero_mean = false;
    bool qp = false;
    bool prune = false;
};

/// --seed sets the discovery seed (the base seed for compare); gridworld-gen applies it to the grid instead.
inline void apply_overrides(ExperimentConfig& cfg, const Overrides& ov) {
    if (ov.seed) cfg.discovery.rng_seed = *ov.seed;
    if (ov.output_dir) cfg.output_dir = *ov.output_dir;
    if (ov.method) {
        cfg.discovery.method = *ov.method;
        cfg.evaluation.methods = {*ov.method};
    }
    if (ov.zero_mean) cfg.discovery.solver.zero_mean = true;
    if (ov.qp) cfg.discovery.solver.use_qp = true;
    if (ov.prune) cfg.discovery.prune_inactive = true;
}

/// 64-bit FNV-1a, hex.
inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[size_t(i)] = digits[h & 0xf];
    return out;
}

/// Hash of the canonical config without the output directory.
inline std::string config_hash(const ExperimentConfig& cfg) {
    json j = config_to_json(cfg);
    j.erase("output");
    return fnv1a_hex(j.dump());
}

// ---------------------------------------------------------------- commands

struct CommandReport {
    /// Files written, relative to the output directory.
    std::vector<std::string> files;
    /// One-line human summary for stdout.
    std::string summary;
};

namespace detail {

struct LoadedMdp {
    FeatureMdp mdp;
    std::optional<GridWorld> grid;
};

inline LoadedMdp load_experiment_mdp(const ExperimentConfig& cfg) {
    switch (cfg.source) {
    case MdpSource::gridworld: {
        GridWorld world = generate(cfg.grid);
        FeatureMdp mdp = world.mdp;
        return {std::move(mdp), std::move(world)};
    }
    case MdpSource::star: return {make_star_mdp(cfg.star_arms, cfg.star_discount), std::nullopt};
    case MdpSource::file: return {load_mdp(cfg.mdp_path), std::nullopt};
    }
    throw validation_error("unknown MDP source");
}

class OutputDir {
  public:
    explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {}

    void write(const std::string& name, const std::string& content) {
        write_text_file(root_ / name, content);
        report.files.push_back(name);
    }

    void write_manifest(const std::string& command, const ExperimentConfig& cfg, std::uint64_t seed) {
        json files = json::array();
        for (const auto& f : report.files) files.push_back(f);
        // the output directory is left out so identical runs into different directories match byte for byte
        json config = config_to_json(cfg);
        config.erase("output");
        const json manifest{{"command", command},
                            {"seed", seed},
                            {"config_hash", config_hash(cfg)},
                            {"config", config},
                            {"files", files}};
        write("manifest.json", manifest.dump(2) + "\n");
    }

    CommandReport report;

  private:
    std::filesystem::path root_;
};

inline double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / double(xs.size());
}

/// Half-width of a Gaussian 95% interval on the mean.
inline double ci95_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return 1.96 * std::sqrt(ss / double(xs.size() - 1)) / std::sqrt(double(xs.size()));
}

inline std::string csv_row(std::initializer_list<std::string> cells) {
    std::string out;
    for (const auto& c : cells) {
        if (!out.empty()) out += ',';
        out += c;
    }
    return out + '\n';
}

inline std::string num(double x) { return format_double(x); }
inline std::string num(int x) { return std::to_string(x); }
inline std::string num(std::uint64_t x) { return std::to_string(x); }

/// Separate stream for test rewards so they do not depend on how many draws discovery made.
inline std::uint64_t test_reward_seed(std::uint64_t seed) { return seed ^ 0x7465737472657764ull; }

} // namespace detail

inline CommandReport cmd_discover(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto loaded = detail::load_experiment_mdp(cfg);
    const FeatureMdp& mdp = loaded.mdp;

    WorstCaseSolution final_solution;
    const auto result = run_discovery(mdp, cfg.discovery,
                                      [&](const PolicySet&, const WorstCaseSolution& sol, const DiscoveryRecord&) {
                                          final_solution = sol;
                                      });

    detail::OutputDir out(cfg.output_dir);
    out.write("mdp.json", mdp_to_json(mdp).dump() + "\n");
    out.write("policies.json", policy_set_to_json(result.policies).dump(2) + "\n");
    out.write("log.jsonl", log_to_jsonl(result.log));
    out.write("log.csv", log_to_csv(result.log));
    out.write("sfs.csv", sf_matrix_to_csv(result.policies.sf_matrix()));
    json wc = solution_to_json(final_solution);
    wc["stop"] = result.log.stop == StopReason::converged ? "converged" : "max_policies";
    wc["set_size"] = result.policies.size();
    out.write("worst_case.json", wc.dump(2) + "\n");

    if (loaded.grid) {
        const GridWorld& world = *loaded.grid;
        out.write("grid.txt", render_ascii(world));
        int start = 0;
        while (mdp.initial_dist()[start] <= 0.0) ++start;
        std::string traj = "policy,step,row,col\n";
        for (size_t i = 0; i < result.policies.size(); ++i) {
            const auto path = greedy_trajectory(world, result.policies.policy(i), start, cfg.trajectory_steps);
            for (size_t t = 0; t < path.size(); ++t) {
                const auto [row, col] = world.coords(path[t]);
                traj += detail::csv_row({std::to_string(i), std::to_string(t), std::to_string(row), std::to_string(col)});
            }
        }
        out.write("trajectories.csv", traj);
    }
    out.write_manifest("discover", cfg, cfg.discovery.rng_seed);

    const auto& last = result.log.records.back();
    out.report.summary = "discover: " + std::to_string(result.policies.size()) + " policies, v_bar = " +
                         format_double(last.v_bar) + " (" + wc["stop"].get<std::string>() + ")";
    return out.report;
}

/// One row of worst_case_curves.csv / test_rewards.csv.
struct CompareRow {
    DiscoveryMethod method{};
    std::uint64_t seed = 0;
    int iteration = 0;
    int set_size = 0;
    double v_bar = 0.0;
    double gpi_upper = 0.0;
    double v_bar_zero_mean = 0.0;
    double new_policy_value = 0.0;
    int active_count = 0;
    double smp_test_mean = 0.0;
    double smp_test_min = 0.0;
    /// SMP mean over the rewards GPI was evaluated on, for a like-for-like comparison.
    double smp_gpi_subset_mean = 0.0;
    double gpi_test_mean = 0.0;
};

struct CompareRun {
    std::vector<CompareRow> rows;
    StopReason stop = StopReason::max_policies;
};

/// Discovery for one (method, seed) with the per-iteration evaluation used by compare.
inline CompareRun compare_single(const FeatureMdp& mdp, const ExperimentConfig& cfg, DiscoveryMethod method,
                                 std::uint64_t seed) {
    const int d = mdp.feature_dim();
    DiscoveryConfig dcfg = cfg.discovery;
    dcfg.method = method;
    dcfg.rng_seed = seed;
    dcfg.max_policies = method == DiscoveryMethod::orthogonal ? std::min(cfg.evaluation.max_set_size, d)
                                                              : cfg.evaluation.max_set_size;

    Rng test_rng(detail::test_reward_seed(seed));
    Matrix test_rewards(d, cfg.evaluation.num_test_rewards);
    for (int j = 0; j < cfg.evaluation.num_test_rewards; ++j) test_rewards.col(j) = sample_unit_ball(test_rng, d);
    const int gpi_count = std::min(cfg.evaluation.gpi_test_rewards, cfg.evaluation.num_test_rewards);
    SolverConfig zero = dcfg.solver;
    zero.zero_mean = true;

    CompareRun run;
    const auto result =
        run_discovery(mdp, dcfg, [&](const PolicySet& set, const WorstCaseSolution& sol, const DiscoveryRecord& rec) {
            CompareRow row;
            row.method = method;
            row.seed = seed;
            row.iteration = rec.iteration;
            row.set_size = rec.set_size;
            row.v_bar = rec.v_bar;
            row.new_policy_value = rec.new_policy_value;
            row.active_count = rec.active_count;
            row.gpi_upper = gpi_bracket(mdp, set, sol).upper;
            row.v_bar_zero_mean = solve_configured(set.sf_matrix(), zero).value;
            const Vector smp = (set.sf_matrix() * test_rewards).colwise().maxCoeff().transpose();
            row.smp_test_mean = smp.mean();
            row.smp_test_min = smp.minCoeff();
            double gpi_sum = 0.0;
            for (int j = 0; j < gpi_count; ++j) {
                gpi_sum += gpi_value(mdp, set, RewardVector(Vector(test_rewards.col(j))));
            }
            row.gpi_test_mean = gpi_count > 0 ? gpi_sum / gpi_count : 0.0;
            row.smp_gpi_subset_mean = gpi_count > 0 ? smp.head(gpi_count).mean() : 0.0;
            run.rows.push_back(row);
        });
    run.stop = result.log.stop;
    return run;
}

inline CommandReport cmd_compare(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto loaded = detail::load_experiment_mdp(cfg);
    const FeatureMdp& mdp = loaded.mdp;
    const int max_k = cfg.evaluation.max_set_size;
    using detail::num;

    std::string curves =
        "method,seed,iteration,set_size,v_bar,gpi_upper,v_bar_zero_mean,new_policy_value,active_count\n";
    std::string tests = "method,seed,iteration,set_size,smp_mean,smp_min,smp_gpi_subset_mean,gpi_mean\n";

    // per method, per policy count k (1-based): one value per seed
    struct Series {
        std::vector<std::vector<double>> v_bar, gpi_upper, smp_mean, gpi_mean;
        std::vector<int> carried;
    };
    std::map<DiscoveryMethod, Series> series;

    for (DiscoveryMethod method : cfg.evaluation.methods) {
        Series& s = series[method];
        s.v_bar.assign(size_t(max_k) + 1, {});
        s.gpi_upper = s.smp_mean = s.gpi_mean = s.v_bar;
        s.carried.assign(size_t(max_k) + 1, 0);
        for (int i = 0; i < cfg.evaluation.num_seeds; ++i) {
            const std::uint64_t seed = cfg.discovery.rng_seed + std::uint64_t(i);
            const CompareRun run = compare_single(mdp, cfg, method, seed);
            for (const auto& r : run.rows) {
                curves += detail::csv_row({to_string(method), num(seed), num(r.iteration), num(r.set_size),
                                           num(r.v_bar), num(r.gpi_upper), num(r.v_bar_zero_mean),
                                           num(r.new_policy_value), num(r.active_count)});
                tests += detail::csv_row({to_string(method), num(seed), num(r.iteration), num(r.set_size),
                                          num(r.smp_test_mean), num(r.smp_test_min), num(r.smp_gpi_subset_mean),
                                          num(r.gpi_test_mean)});
            }
            // A converged worst-case run is optimal, so its last set stands for every larger count.
            const int last = run.rows.back().iteration;
            const int reach = run.stop == StopReason::converged ? max_k : std::min(last, max_k);
            for (int k = 1; k <= reach; ++k) {
                const CompareRow& r = run.rows[size_t(std::min(k, last) - 1)];
                s.v_bar[size_t(k)].push_back(r.v_bar);
                s.gpi_upper[size_t(k)].push_back(r.gpi_upper);
                s.smp_mean[size_t(k)].push_back(r.smp_test_mean);
                s.gpi_mean[size_t(k)].push_back(r.gpi_test_mean);
                if (k > last) ++s.carried[size_t(k)];
            }
        }
    }

    const auto complete = [&](const Series& s, int k) {
        return int(s.v_bar[size_t(k)].size()) == cfg.evaluation.num_seeds;
    };

    std::string summary = "method,policies,num_seeds,carried,v_bar_mean,v_bar_ci95,gpi_upper_mean\n";
    std::string test_summary = "method,policies,num_seeds,smp_mean,smp_ci95,gpi_mean,gpi_ci95\n";
    for (const auto& [method, s] : series) {
        for (int k = 1; k <= max_k; ++k) {
            if (!complete(s, k)) continue;
            summary += detail::csv_row({to_string(method), num(k), num(cfg.evaluation.num_seeds),
                                        num(s.carried[size_t(k)]), num(detail::mean_of(s.v_bar[size_t(k)])),
                                        num(detail::ci95_of(s.v_bar[size_t(k)])),
                                        num(detail::mean_of(s.gpi_upper[size_t(k)]))});
            test_summary += detail::csv_row(
                {to_string(method), num(k), num(cfg.evaluation.num_seeds), num(detail::mean_of(s.smp_mean[size_t(k)])),
                 num(detail::ci95_of(s.smp_mean[size_t(k)])), num(detail::mean_of(s.gpi_mean[size_t(k)])),
                 num(detail::ci95_of(s.gpi_mean[size_t(k)]))});
        }
    }

    // Targets come from the worst-case method when it ran, else the first listed method.
    const DiscoveryMethod reference = series.count(DiscoveryMethod::worst_case) ? DiscoveryMethod::worst_case
                                                                                 : cfg.evaluation.methods.front();
    std::string needed = "reference_policies,target_smp_mean,method,policies_needed\n";
    std::string margins = "policies,baseline,worst_case_v_bar_mean,baseline_v_bar_mean,margin\n";
    const Series& ref = series.at(reference);
    for (int k = 1; k <= max_k; ++k) {
        if (!complete(ref, k)) continue;
        const double target = detail::mean_of(ref.smp_mean[size_t(k)]);
        for (const auto& [method, s] : series) {
            std::string hit;
            for (int j = 1; j <= max_k && hit.empty(); ++j) {
                if (complete(s, j) && detail::mean_of(s.smp_mean[size_t(j)]) >= target - 1e-12) hit = num(j);
            }
            needed += detail::csv_row({num(k), num(target), to_string(method), hit});
        }
    }
    if (series.count(DiscoveryMethod::worst_case)) {
        const Series& wc = series.at(DiscoveryMethod::worst_case);
        for (const auto& [method, s] : series) {
            if (method == DiscoveryMethod::worst_case) continue;
            for (int k = 1; k <= max_k; ++k) {
                if (!complete(wc, k) || !complete(s, k)) continue;
                const double a = detail::mean_of(wc.v_bar[size_t(k)]);
                const double b = detail::mean_of(s.v_bar[size_t(k)]);
                margins += detail::csv_row({num(k), to_string(method), num(a), num(b), num(a - b)});
            }
        }
    }

    detail::OutputDir out(cfg.output_dir);
    out.write("worst_case_curves.csv", curves);
    out.write("worst_case_summary.csv", summary);
    out.write("test_rewards.csv", tests);
    out.write("test_rewards_summary.csv", test_summary);
    out.write("policies_needed.csv", needed);
    out.write("margins.csv", margins);
    out.write_manifest("compare", cfg, cfg.discovery.rng_seed);
    out.report.summary = "compare: " + std::to_string(cfg.evaluation.methods.size()) + " methods x " +
                         std::to_string(cfg.evaluation.num_seeds) + " seeds";
    return out.report;
}

/// Solves for w_bar on an SF file; writes solution.json under the output directory when one is given.
inline json cmd_solve_w(const std::filesystem::path& sf_file, const SolverConfig& solver,
                        const std::optional<std::filesystem::path>& output_dir, CommandReport* report = nullptr) {
    solver.validate();
    const SfMatrix sfs = load_sf_file(sf_file);
    const WorstCaseSolution sol = solve_configured(sfs, solver);
    json out = solution_to_json(sol);
    out["solver"] = solver.use_qp ? "qp" : "subgradient";
    out["zero_mean"] = solver.zero_mean;
    out["degenerate"] = sol.degenerate;
    if (output_dir) {
        write_text_file(*output_dir / "solution.json", out.dump(2) + "\n");
        if (report) report->files.push_back("solution.json");
    }
    if (report) report->summary = "solve-w: v_bar = " + format_double(sol.value);
    return out;
}

/// gridworld-gen: --seed (through Overrides) selects the grid layout.
inline CommandReport cmd_gridworld_gen(const ExperimentConfig& cfg) {
    detail::require(cfg.source == MdpSource::gridworld, "gridworld-gen needs mdp.source = gridworld");
    cfg.validate();
    const GridWorld world = generate(cfg.grid);
    detail::OutputDir out(cfg.output_dir);
    out.write("mdp.json", mdp_to_json(world.mdp).dump() + "\n");
    out.write("grid.txt", render_ascii(world));
    out.write_manifest("gridworld-gen", cfg, cfg.grid.rng_seed);
    out.report.summary = "gridworld-gen: " + std::to_string(cfg.grid.width) + "x" + std::to_string(cfg.grid.height) +
                         " grid, d = " + std::to_string(cfg.grid.feature_dim());
    return out.report;
}

inline CommandReport cmd_al_baseline(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto loaded = detail::load_experiment_mdp(cfg);
    CgOptions cg = cfg.apprenticeship;
    cg.planner = cfg.discovery.planner;
    const MixedSfPoint mix = cg_min_norm(loaded.mdp, cg);

    DiscoveryConfig dcfg = cfg.discovery;
    dcfg.method = DiscoveryMethod::worst_case;
    const auto disc = discover(loaded.mdp, dcfg);

    json vertex_sfs = json::array(), vertices = json::array();
    for (size_t i = 0; i < mix.vertices.size(); ++i) {
        vertex_sfs.push_back(vector_to_json(mix.vertex_sfs[i]));
        vertices.push_back(mix.vertices[i].actions);
    }
    const json al{{"final_norm", mix.norm()},
                  {"worst_case_value", mix.worst_case_value()},
                  {"point", vector_to_json(mix.point)},
                  {"iterations", mix.iterations},
                  {"gap", mix.gap},
                  {"weights", mix.weights},
                  {"vertex_sfs", vertex_sfs},
                  {"vertex_policies", vertices},
                  {"objective_history", mix.objective_history},
                  {"discovery",
                   {{"v_bar", disc.log.records.back().v_bar},
                    {"set_size", disc.policies.size()},
                    {"stop", disc.log.stop == StopReason::converged ? "converged" : "max_policies"}}}};

    detail::OutputDir out(cfg.output_dir);
    out.write("al.json", al.dump(2) + "\n");
    out.write_manifest("al-baseline", cfg, cfg.discovery.rng_seed);
    out.report.summary = "al-baseline: mixture norm " + format_double(mix.norm()) + " after " +
                         std::to_string(mix.iterations) + " iterations; discovery v_bar " +
                         format_double(disc.log.records.back().v_bar);
    return out.report;
}

} // namespace smpset
