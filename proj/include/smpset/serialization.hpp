#pragma once

#include "smpset/composition.hpp"
#include "smpset/discovery.hpp"
#include "smpset/worst_case.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace smpset {

using json = nlohmann::json;

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open file for reading", path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw io_error("cannot create directory", path.parent_path().string());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open file for writing", path.string());
    out << content;
    if (!out) throw io_error("write failed", path.string());
}

inline json parse_json(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw validation_error("malformed JSON in " + origin + ": " + e.what());
    }
}

inline json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(v[k]);
    return arr;
}

inline Vector vector_from_json(const json& j, const std::string& what) {
    detail::require(j.is_array(), what + " must be an array");
    Vector v(Eigen::Index(j.size()));
    for (size_t k = 0; k < j.size(); ++k) {
        detail::require(j[k].is_number(), what + " must contain numbers");
        v[Eigen::Index(k)] = j[k].get<double>();
    }
    return v;
}

// ---------------------------------------------------------------- MDP

/**
 * MDP document:
 *   num_states, num_actions : integers
 *   discount                : number in [0, 1)
 *   initial_dist            : [S]
 *   transitions             : [S][A][S]
 *   features                : [S][A][S][d]
 */
inline json mdp_to_json(const FeatureMdp& mdp) {
    const int S = mdp.num_states(), A = mdp.num_actions(), d = mdp.feature_dim();
    json transitions = json::array();
    json features = json::array();
    for (int s = 0; s < S; ++s) {
        json ts = json::array(), fs = json::array();
        for (int a = 0; a < A; ++a) {
            json ta = json::array(), fa = json::array();
            for (int next = 0; next < S; ++next) {
                ta.push_back(mdp.transition(s, a, next));
                json phi = json::array();
                for (int k = 0; k < d; ++k) phi.push_back(mdp.feature(s, a, next, k));
                fa.push_back(std::move(phi));
            }
            ts.push_back(std::move(ta));
            fs.push_back(std::move(fa));
        }
        transitions.push_back(std::move(ts));
        features.push_back(std::move(fs));
    }
    json out;
    out["num_states"] = S;
    out["num_actions"] = A;
    out["discount"] = mdp.discount();
    out["initial_dist"] = vector_to_json(mdp.initial_dist());
    out["transitions"] = std::move(transitions);
    out["features"] = std::move(features);
    return out;
}

inline FeatureMdp mdp_from_json(const json& j) {
    detail::require(j.is_object(), "MDP document must be a JSON object");
    for (const char* key : {"num_states", "num_actions", "discount", "initial_dist", "transitions", "features"}) {
        detail::require(j.contains(key), std::string("MDP document is missing '") + key + "'");
    }
    const int S = j.at("num_states").get<int>();
    const int A = j.at("num_actions").get<int>();
    detail::require(S > 0 && A > 0, "num_states and num_actions must be positive");
    const json& tr = j.at("transitions");
    const json& ft = j.at("features");
    detail::require(ft.is_array() && ft.size() == size_t(S) && ft[0].is_array() && ft[0].size() == size_t(A) &&
                        ft[0][0].is_array() && ft[0][0].size() == size_t(S) && ft[0][0][0].is_array(),
                    "features must be nested [S][A][S][d]");
    const int d = int(ft[0][0][0].size());
    MdpTables t(S, A, d, j.at("discount").get<double>());
    detail::require(tr.is_array() && tr.size() == size_t(S), "transitions must be nested [S][A][S]");
    for (int s = 0; s < S; ++s) {
        detail::require(tr[size_t(s)].is_array() && tr[size_t(s)].size() == size_t(A) &&
                            ft[size_t(s)].is_array() && ft[size_t(s)].size() == size_t(A),
                        "transition/feature tables have the wrong number of actions");
        for (int a = 0; a < A; ++a) {
            const json& trow = tr[size_t(s)][size_t(a)];
            const json& frow = ft[size_t(s)][size_t(a)];
            detail::require(trow.is_array() && trow.size() == size_t(S) && frow.is_array() && frow.size() == size_t(S),
                            "transition/feature tables have the wrong number of next states");
            for (int next = 0; next < S; ++next) {
                t.p(s, a, next) = trow[size_t(next)].get<double>();
                const json& phi = frow[size_t(next)];
                detail::require(phi.is_array() && phi.size() == size_t(d), "feature vectors must all have length d");
                for (int k = 0; k < d; ++k) t.phi(s, a, next, k) = phi[size_t(k)].get<double>();
            }
        }
    }
    const Vector init = vector_from_json(j.at("initial_dist"), "initial_dist");
    detail::require_dim("initial_dist", S, init.size());
    for (int s = 0; s < S; ++s) t.initial_dist[size_t(s)] = init[s];
    return FeatureMdp(std::move(t));
}

inline void save_mdp(const std::filesystem::path& path, const FeatureMdp& mdp) {
    write_text_file(path, mdp_to_json(mdp).dump() + "\n");
}

inline FeatureMdp load_mdp(const std::filesystem::path& path) {
    return mdp_from_json(parse_json(read_text_file(path), path.string()));
}

// ---------------------------------------------------------------- worst-case solutions

inline json solution_to_json(const WorstCaseSolution& sol) {
    json out;
    out["w_bar"] = vector_to_json(sol.w_bar.weights());
    out["value"] = sol.value;
    out["active_indices"] = sol.active_indices;
    out["solver_iterations"] = sol.solver_iterations;
    return out;
}

inline WorstCaseSolution solution_from_json(const json& j) {
    WorstCaseSolution sol;
    sol.w_bar = RewardVector(vector_from_json(j.at("w_bar"), "w_bar"));
    sol.value = j.at("value").get<double>();
    sol.active_indices = j.at("active_indices").get<std::vector<int>>();
    sol.solver_iterations = j.at("solver_iterations").get<int>();
    return sol;
}

// ---------------------------------------------------------------- SF matrices

/// CSV with header psi_0..psi_{d-1}, one row per policy.
inline std::string sf_matrix_to_csv(const SfMatrix& sfs) {
    std::string out;
    for (Eigen::Index k = 0; k < sfs.cols(); ++k) out += (k ? ",psi_" : "psi_") + std::to_string(k);
    out += '\n';
    for (Eigen::Index i = 0; i < sfs.rows(); ++i) {
        for (Eigen::Index k = 0; k < sfs.cols(); ++k) {
            if (k) out += ',';
            out += format_double(sfs(i, k));
        }
        out += '\n';
    }
    return out;
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

inline std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline bool parse_number(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    const char* first = t.data();
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, t.data() + t.size(), out);
    return res.ec == std::errc() && res.ptr == t.data() + t.size();
}

} // namespace detail

/// Parses SF rows from CSV (optional header line) or JSON (array of rows, or {"sfs": rows}).
inline SfMatrix parse_sf_text(const std::string& text, const std::string& origin) {
    const std::string body = detail::trim(text);
    detail::require(!body.empty(), "SF file is empty: " + origin);
    std::vector<Vector> rows;
    if (body.front() == '[' || body.front() == '{') {
        json j = parse_json(body, origin);
        if (j.is_object()) {
            detail::require(j.contains("sfs"), "SF JSON object needs an 'sfs' field: " + origin);
            j = j.at("sfs");
        }
        detail::require(j.is_array(), "SF JSON must be an array of rows: " + origin);
        for (const auto& row : j) rows.push_back(vector_from_json(row, "SF row"));
    } else {
        std::istringstream in(body);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            line = detail::trim(line);
            if (line.empty() || line.front() == '#') continue;
            const auto cells = detail::split(line, ',');
            std::vector<double> values;
            bool numeric = true;
            for (const auto& c : cells) {
                double v = 0.0;
                if (!detail::parse_number(c, v)) {
                    numeric = false;
                    break;
                }
                values.push_back(v);
            }
            if (!numeric) {
                detail::require(rows.empty() && line_no == 1,
                                "non-numeric SF entry at " + origin + ":" + std::to_string(line_no));
                continue;
            }
            rows.emplace_back(Eigen::Map<const Vector>(values.data(), Eigen::Index(values.size())));
        }
    }
    detail::require(!rows.empty(), "SF file has no rows: " + origin);
    for (const auto& r : rows) detail::require(r.size() == rows.front().size(), "SF rows differ in length: " + origin);
    return stack_rows(rows);
}

inline SfMatrix load_sf_file(const std::filesystem::path& path) {
    return parse_sf_text(read_text_file(path), path.string());
}

// ---------------------------------------------------------------- policy sets

/// {num_states, num_actions, feature_dim, policies: [[a_s]...], sfs: [[psi_k]...]}
inline json policy_set_to_json(const PolicySet& set) {
    json out;
    out["num_states"] = set.num_states();
    out["num_actions"] = set.num_actions();
    out["feature_dim"] = set.feature_dim();
    json policies = json::array(), sfs = json::array();
    for (size_t i = 0; i < set.size(); ++i) {
        policies.push_back(set.policy(i).actions);
        sfs.push_back(vector_to_json(set.sf(i).aggregate));
    }
    out["policies"] = std::move(policies);
    out["sfs"] = std::move(sfs);
    return out;
}

/// Rebuilds a policy set on mdp; stored SFs must match the recomputed ones.
inline PolicySet policy_set_from_json(const json& j, const FeatureMdp& mdp, double tol = 1e-9) {
    detail::require_dim("policy set states", mdp.num_states(), j.at("num_states").get<long>());
    detail::require_dim("policy set actions", mdp.num_actions(), j.at("num_actions").get<long>());
    detail::require_dim("policy set features", mdp.feature_dim(), j.at("feature_dim").get<long>());
    const json& policies = j.at("policies");
    const json& sfs = j.at("sfs");
    detail::require(policies.size() == sfs.size(), "policy set has mismatched policies/sfs lengths");
    PolicySet set(mdp);
    for (size_t i = 0; i < policies.size(); ++i) {
        DeterministicPolicy pi(policies[i].get<std::vector<int>>());
        set.add(mdp, pi);
        const Vector stored = vector_from_json(sfs[i], "stored SF");
        detail::require_dim("stored SF", mdp.feature_dim(), stored.size());
        detail::require((stored - set.sf(i).aggregate).cwiseAbs().maxCoeff() <= tol,
                        "stored SF of policy " + std::to_string(i) + " does not match the MDP");
    }
    return set;
}

// ---------------------------------------------------------------- discovery logs

inline json record_to_json(const DiscoveryRecord& r) {
    json out;
    out["iteration"] = r.iteration;
    out["set_size"] = r.set_size;
    out["v_bar"] = r.v_bar;
    out["new_policy_value"] = r.new_policy_value;
    out["active_count"] = r.active_count;
    out["w_bar"] = vector_to_json(r.w_bar.weights());
    return out;
}

inline DiscoveryRecord record_from_json(const json& j) {
    DiscoveryRecord r;
    r.iteration = j.at("iteration").get<int>();
    r.set_size = j.at("set_size").get<int>();
    r.v_bar = j.at("v_bar").get<double>();
    r.new_policy_value = j.at("new_policy_value").get<double>();
    r.active_count = j.at("active_count").get<int>();
    r.w_bar = RewardVector(vector_from_json(j.at("w_bar"), "w_bar"));
    return r;
}

inline std::string log_to_jsonl(const DiscoveryLog& log) {
    std::string out;
    for (const auto& r : log.records) out += record_to_json(r).dump() + "\n";
    return out;
}

inline DiscoveryLog log_from_jsonl(const std::string& text) {
    DiscoveryLog log;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        log.records.push_back(record_from_json(parse_json(line, "log line")));
    }
    return log;
}

/// Header: iteration,set_size,v_bar,new_policy_value,active_count,w_0..w_{d-1}
inline std::string log_to_csv(const DiscoveryLog& log) {
    std::string out = "iteration,set_size,v_bar,new_policy_value,active_count";
    const Eigen::Index d = log.records.empty() ? 0 : log.records.front().w_bar.dim();
    for (Eigen::Index k = 0; k < d; ++k) out += ",w_" + std::to_string(k);
    out += '\n';
    for (const auto& r : log.records) {
        out += std::to_string(r.iteration) + ',' + std::to_string(r.set_size) + ',' + format_double(r.v_bar) + ',' +
               format_double(r.new_policy_value) + ',' + std::to_string(r.active_count);
        for (Eigen::Index k = 0; k < d; ++k) out += ',' + format_double(r.w_bar[k]);
        out += '\n';
    }
    return out;
}

} // namespace smpset
