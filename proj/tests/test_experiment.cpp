#include "smpset/experiment.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

using namespace smpset;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("smpset_experiment_" + name);
    fs::remove_all(dir);
    return dir;
}

using CsvRow = std::map<std::string, std::string>;

std::vector<CsvRow> read_csv(const fs::path& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    std::getline(in, line);
    const auto header = detail::split(line, ',');
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        const auto cells = detail::split(line, ',');
        EXPECT_EQ(cells.size(), header.size()) << path << ": " << line;
        CsvRow row;
        for (size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
        rows.push_back(row);
    }
    return rows;
}

double num(const CsvRow& row, const std::string& key) {
    double v = 0.0;
    EXPECT_TRUE(detail::parse_number(row.at(key), v)) << key << "=" << row.at(key);
    return v;
}

ExperimentConfig small_grid_config(const fs::path& out) {
    ExperimentConfig cfg;
    cfg.grid.width = cfg.grid.height = 5;
    cfg.grid.num_item_classes = 3;
    cfg.grid.items_per_class = 2;
    cfg.grid.rng_seed = 4;
    cfg.evaluation.num_seeds = 3;
    cfg.evaluation.max_set_size = 5;
    cfg.evaluation.num_test_rewards = 100;
    cfg.evaluation.gpi_test_rewards = 10;
    cfg.output_dir = out.string();
    return cfg;
}

void expect_same_tree(const fs::path& a, const fs::path& b) {
    size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        const auto name = entry.path().filename();
        ASSERT_TRUE(fs::exists(b / name)) << name;
        EXPECT_EQ(read_text_file(entry.path()), read_text_file(b / name)) << name;
        ++files;
    }
    EXPECT_GT(files, 0u);
}

} // namespace

TEST(Config, DefaultsAndPartialFiles) {
    const auto cfg = config_from_json(parse_json(R"({"discovery": {"seed": 7}})", "inline"));
    EXPECT_EQ(cfg.discovery.rng_seed, 7u);
    EXPECT_EQ(cfg.discovery.max_policies, 12);
    EXPECT_EQ(cfg.grid.width, 10);
    EXPECT_EQ(cfg.evaluation.num_test_rewards, 500);
    EXPECT_EQ(cfg.evaluation.methods.size(), 3u);
}

TEST(Config, CanonicalFormRoundTrips) {
    ExperimentConfig cfg;
    cfg.source = MdpSource::star;
    cfg.star_arms = 6;
    cfg.discovery.solver.zero_mean = true;
    cfg.evaluation.methods = {DiscoveryMethod::random};
    const json j = config_to_json(cfg);
    const auto back = config_from_json(j);
    EXPECT_EQ(config_to_json(back), j);
    EXPECT_EQ(config_hash(back), config_hash(cfg));
    cfg.star_arms = 5;
    EXPECT_NE(config_hash(back), config_hash(cfg));
}

TEST(Config, RejectsUnknownKeysAndWrongTypes) {
    EXPECT_THROW(config_from_json(parse_json(R"({"discovery": {"max_policy": 3}})", "c")), validation_error);
    EXPECT_THROW(config_from_json(parse_json(R"({"extra": 1})", "c")), validation_error);
    EXPECT_THROW(config_from_json(parse_json(R"({"discovery": {"max_policies": 2.5}})", "c")), validation_error);
    EXPECT_THROW(config_from_json(parse_json(R"({"solver": {"zero_mean": "yes"}})", "c")), validation_error);
    EXPECT_THROW(config_from_json(parse_json(R"({"mdp": {"source": "maze"}})", "c")), validation_error);
    EXPECT_THROW(config_from_json(parse_json(R"({"discovery": {"seed": -1}})", "c")), validation_error);
    EXPECT_THROW(config_from_json(parse_json(R"([1, 2])", "c")), validation_error);

    ExperimentConfig cfg;
    cfg.evaluation.num_test_rewards = 0;
    EXPECT_THROW(cfg.validate(), validation_error);
    cfg = ExperimentConfig{};
    cfg.source = MdpSource::file;
    cfg.mdp_path = "/nonexistent/smpset.json";
    EXPECT_THROW(cfg.validate(), validation_error);
}

TEST(Config, OverridesApply) {
    ExperimentConfig cfg;
    Overrides ov;
    ov.seed = 99;
    ov.output_dir = "elsewhere";
    ov.method = DiscoveryMethod::orthogonal;
    ov.zero_mean = ov.qp = ov.prune = true;
    apply_overrides(cfg, ov);
    EXPECT_EQ(cfg.discovery.rng_seed, 99u);
    EXPECT_EQ(cfg.output_dir, "elsewhere");
    EXPECT_EQ(cfg.discovery.method, DiscoveryMethod::orthogonal);
    EXPECT_EQ(cfg.evaluation.methods, std::vector<DiscoveryMethod>{DiscoveryMethod::orthogonal});
    EXPECT_TRUE(cfg.discovery.solver.zero_mean && cfg.discovery.solver.use_qp && cfg.discovery.prune_inactive);
}

TEST(Fnv1a, KnownVectors) {
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(CmdDiscover, SingleCellGridStopsAtMinusOne) {
    ExperimentConfig cfg;
    cfg.grid.width = cfg.grid.height = 1;
    cfg.grid.num_item_classes = 0;
    const auto dir = scratch_dir("single");
    cfg.output_dir = dir.string();
    cmd_discover(cfg);
    const auto log = log_from_jsonl(read_text_file(dir / "log.jsonl"));
    ASSERT_EQ(log.records.size(), 1u);
    EXPECT_NEAR(log.records[0].v_bar, -1.0, 1e-12);
    EXPECT_EQ(read_text_file(dir / "grid.txt"), ".\n");
}

TEST(CmdDiscover, StarConfigReachesInverseSqrtD) {
    ExperimentConfig cfg;
    cfg.source = MdpSource::star;
    cfg.star_arms = 3;
    const auto dir = scratch_dir("star");
    cfg.output_dir = dir.string();
    const auto report = cmd_discover(cfg);
    EXPECT_FALSE(fs::exists(dir / "grid.txt"));
    const auto rows = read_csv(dir / "log.csv");
    EXPECT_NEAR(num(rows.back(), "v_bar"), -1.0 / std::sqrt(3.0), 1e-9);
    const auto wc = parse_json(read_text_file(dir / "worst_case.json"), "wc");
    EXPECT_EQ(wc.at("stop"), "converged");
    const auto manifest = parse_json(read_text_file(dir / "manifest.json"), "manifest");
    EXPECT_EQ(manifest.at("config_hash"), config_hash(cfg));
    EXPECT_EQ(manifest.at("files").size() + 1, report.files.size());
}

TEST(CmdDiscover, OutputsReloadAndAreByteIdenticalAcrossRuns) {
    const auto a = scratch_dir("det_a");
    const auto b = scratch_dir("det_b");
    auto cfg = small_grid_config(a);
    cmd_discover(cfg);
    cfg.output_dir = b.string();
    cmd_discover(cfg);
    expect_same_tree(a, b);

    const auto mdp = load_mdp(a / "mdp.json");
    const auto set = policy_set_from_json(parse_json(read_text_file(a / "policies.json"), "set"), mdp);
    EXPECT_EQ(load_sf_file(a / "sfs.csv"), set.sf_matrix());
    const auto traj = read_csv(a / "trajectories.csv");
    EXPECT_EQ(traj.size(), set.size() * size_t(cfg.trajectory_steps + 1));
}

TEST(CmdCompare, CsvFilesReverifyTheGuarantees) {
    const auto dir = scratch_dir("compare");
    const auto cfg = small_grid_config(dir);
    cmd_compare(cfg);

    // GPI dominance and the SMP bracket, from the curves file alone
    std::map<std::string, std::vector<CsvRow>> by_run;
    for (const auto& row : read_csv(dir / "worst_case_curves.csv")) {
        EXPECT_GE(num(row, "gpi_upper"), num(row, "v_bar") - 1e-9);
        EXPECT_GE(num(row, "new_policy_value"), num(row, "v_bar") - 1e-9);
        EXPECT_LE(num(row, "v_bar"), 0.0);
        by_run[row.at("method") + "/" + row.at("seed")].push_back(row);
    }
    EXPECT_EQ(by_run.size(), 9u);
    for (const auto& [run, rows] : by_run) {
        if (run.rfind("worst_case/", 0) != 0) continue;
        for (size_t t = 0; t + 1 < rows.size(); ++t) {
            EXPECT_GT(num(rows[t + 1], "v_bar") - num(rows[t], "v_bar"), 1e-8) << run << " t=" << t;
        }
        if (int(rows.size()) < cfg.evaluation.max_set_size) {
            EXPECT_LE(num(rows.back(), "new_policy_value") - num(rows.back(), "v_bar"), 1e-8) << run;
        }
    }

    const auto curves = read_csv(dir / "worst_case_curves.csv");
    const auto tests = read_csv(dir / "test_rewards.csv");
    ASSERT_EQ(curves.size(), tests.size());
    for (size_t i = 0; i < tests.size(); ++i) {
        EXPECT_GE(num(tests[i], "gpi_mean"), num(tests[i], "smp_gpi_subset_mean") - 1e-9);
        EXPECT_GE(num(tests[i], "smp_min"), num(curves[i], "v_bar") - 1e-9);
        EXPECT_GE(num(tests[i], "smp_mean"), num(tests[i], "smp_min"));
    }

    const auto summary = read_csv(dir / "worst_case_summary.csv");
    const auto margins = read_csv(dir / "margins.csv");
    EXPECT_FALSE(summary.empty());
    for (const auto& row : margins) {
        EXPECT_NEAR(num(row, "margin"), num(row, "worst_case_v_bar_mean") - num(row, "baseline_v_bar_mean"), 1e-15);
    }
    EXPECT_FALSE(read_csv(dir / "policies_needed.csv").empty());
    EXPECT_FALSE(read_csv(dir / "test_rewards_summary.csv").empty());
}

TEST(CmdCompare, ByteIdenticalAcrossRuns) {
    const auto a = scratch_dir("cmp_a");
    const auto b = scratch_dir("cmp_b");
    auto cfg = small_grid_config(a);
    cfg.evaluation.num_seeds = 2;
    cmd_compare(cfg);
    cfg.output_dir = b.string();
    cmd_compare(cfg);
    expect_same_tree(a, b);
}

TEST(CmdSolveW, SimplexAndSingleRowFiles) {
    const auto dir = scratch_dir("solve");
    write_text_file(dir / "simplex.csv", "1,0,0,0\n0,1,0,0\n0,0,1,0\n0,0,0,1\n");
    write_text_file(dir / "single.csv", "0.6,0.8\n");
    EXPECT_NEAR(cmd_solve_w(dir / "simplex.csv", SolverConfig{}, std::nullopt).at("value").get<double>(), -0.5, 1e-12);
    SolverConfig qp;
    qp.use_qp = true;
    const auto single = cmd_solve_w(dir / "single.csv", qp, dir / "out");
    EXPECT_NEAR(single.at("value").get<double>(), -1.0, 1e-12);
    EXPECT_EQ(single.at("solver"), "qp");
    EXPECT_TRUE(fs::exists(dir / "out" / "solution.json"));
}

TEST(CmdSolveW, ZeroMeanOnAlreadyCenteredSolution) {
    const auto dir = scratch_dir("solve_zero");
    write_text_file(dir / "signed.csv", "1,0,-1\n0,1,-1\n");
    SolverConfig zero;
    zero.zero_mean = true;
    const auto plain = cmd_solve_w(dir / "signed.csv", SolverConfig{}, std::nullopt);
    const auto constrained = cmd_solve_w(dir / "signed.csv", zero, std::nullopt);
    const Vector a = vector_from_json(plain.at("w_bar"), "w");
    const Vector b = vector_from_json(constrained.at("w_bar"), "w");
    EXPECT_LE((a - b).norm(), 1e-6);
    EXPECT_NEAR(plain.at("value").get<double>(), constrained.at("value").get<double>(), 1e-6);
}

TEST(CmdGridworldGen, WritesLoadableMdp) {
    const auto dir = scratch_dir("gen");
    ExperimentConfig cfg;
    cfg.output_dir = dir.string();
    cfg.grid.rng_seed = 12;
    cmd_gridworld_gen(cfg);
    const auto mdp = load_mdp(dir / "mdp.json");
    EXPECT_EQ(mdp.num_states(), 100);
    EXPECT_EQ(read_text_file(dir / "grid.txt"), render_ascii(generate(cfg.grid)));

    // the written file drives a file-sourced run
    ExperimentConfig from_file;
    from_file.source = MdpSource::file;
    from_file.mdp_path = (dir / "mdp.json").string();
    from_file.output_dir = (dir / "run").string();
    cmd_discover(from_file);
    EXPECT_TRUE(fs::exists(dir / "run" / "log.csv"));

    cfg.source = MdpSource::star;
    EXPECT_THROW(cmd_gridworld_gen(cfg), validation_error);
}

TEST(CmdAlBaseline, ReportsMixtureAndDiscoveryValues) {
    const auto dir = scratch_dir("al");
    ExperimentConfig cfg;
    cfg.source = MdpSource::star;
    cfg.star_arms = 4;
    cfg.apprenticeship.line_search = true;
    cfg.output_dir = dir.string();
    cmd_al_baseline(cfg);
    const auto al = parse_json(read_text_file(dir / "al.json"), "al");
    EXPECT_NEAR(al.at("final_norm").get<double>(), 0.5, 1e-6);
    EXPECT_NEAR(al.at("worst_case_value").get<double>(), -0.5, 1e-6);
    EXPECT_NEAR(al.at("discovery").at("v_bar").get<double>(), -0.5, 1e-9);
}
