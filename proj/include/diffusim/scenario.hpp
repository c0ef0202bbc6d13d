#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "diffusim/metrics.hpp"
#include "diffusim/scenario_config.hpp"
#include "diffusim/simulation.hpp"

namespace diffusim {

// ---------------------------------------------------------------------------
// Flat key = value configuration files. '#' starts a comment, keys mirror the
// ScenarioConfig fields one to one, unknown keys are errors, missing keys take
// the documented defaults.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double out = 0.0;
    try {
        out = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key, "expected a number, got '" + value + "'");
    }
    if (pos != value.size()) throw ConfigError(key, "trailing characters in '" + value + "'");
    return out;
}

inline long parse_long(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    long out = 0;
    try {
        out = std::stol(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key, "expected an integer, got '" + value + "'");
    }
    if (pos != value.size()) throw ConfigError(key, "trailing characters in '" + value + "'");
    return out;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    unsigned long long out = 0;
    try {
        out = std::stoull(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key, "expected an unsigned integer, got '" + value + "'");
    }
    if (pos != value.size()) throw ConfigError(key, "trailing characters in '" + value + "'");
    return out;
}

// Shortest decimal form that parses back to the same double.
inline std::string fmt_double(double v) {
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace detail

inline ScenarioConfig parse_config_text(const std::string& text) {
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string stripped = detail::trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string value = detail::trim(stripped.substr(eq + 1));
        if (key.empty()) throw ConfigError("", "line " + std::to_string(lineno) + ": empty key");

        if (key == "n_nodes") cfg.n_nodes = static_cast<int>(detail::parse_long(key, value));
        else if (key == "vec_len") cfg.vec_len = static_cast<int>(detail::parse_long(key, value));
        else if (key == "link_prob") cfg.link_prob = detail::parse_double(key, value);
        else if (key == "obs_prob") cfg.obs_prob = detail::parse_double(key, value);
        else if (key == "transform") {
            if (value == "identity") cfg.transform = TransformKind::Identity;
            else if (value == "dct") cfg.transform = TransformKind::Dct;
            else throw ConfigError(key, "expected identity or dct, got '" + value + "'");
        } else if (key == "mu") cfg.mu = detail::parse_double(key, value);
        else if (key == "noise_sigma") cfg.noise_sigma = detail::parse_double(key, value);
        else if (key == "horizon") cfg.horizon = detail::parse_long(key, value);
        else if (key == "switch_time") cfg.gates.switch_time = detail::parse_long(key, value);
        else if (key == "eta") cfg.gates.eta = detail::parse_double(key, value);
        else if (key == "alpha") cfg.gates.alpha = detail::parse_double(key, value);
        else if (key == "eta_after") cfg.gates.eta_after = detail::parse_double(key, value);
        else if (key == "alpha_after") cfg.gates.alpha_after = detail::parse_double(key, value);
        else if (key == "beta1") cfg.schedule.beta1 = detail::parse_double(key, value);
        else if (key == "beta0") cfg.schedule.beta0 = detail::parse_double(key, value);
        else if (key == "tau") cfg.schedule.tau = detail::parse_double(key, value);
        else if (key == "strategy") {
            if (value == "conventional_averaging") cfg.strategy = Strategy::ConventionalAveraging;
            else if (value == "imat_fixed_threshold") cfg.strategy = Strategy::ImatFixedThreshold;
            else if (value == "imat_adaptive") cfg.strategy = Strategy::ImatAdaptive;
            else if (value == "oracle_optimal_weights") cfg.strategy = Strategy::OracleOptimalWeights;
            else if (value == "no_cooperation") cfg.strategy = Strategy::NoCooperation;
            else throw ConfigError(key, "unknown strategy '" + value + "'");
        } else if (key == "reps") cfg.reps = static_cast<int>(detail::parse_long(key, value));
        else if (key == "seed") {
            cfg.seed = detail::parse_u64(key, value);
            cfg.seed_from_file = true;
        } else if (key == "target_lo") cfg.target.lo = detail::parse_double(key, value);
        else if (key == "target_hi") cfg.target.hi = detail::parse_double(key, value);
        else if (key == "observability") {
            if (value == "partial") cfg.observability = Observability::Partial;
            else if (value == "full") cfg.observability = Observability::Full;
            else throw ConfigError(key, "expected partial or full, got '" + value + "'");
        } else {
            throw ConfigError(key, "unknown key");
        }
    }
    cfg.validate();
    return cfg;
}

inline ScenarioConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), "cannot read config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

inline std::string serialize_config(const ScenarioConfig& cfg) {
    std::ostringstream out;
    out << "n_nodes = " << cfg.n_nodes << "\n";
    out << "vec_len = " << cfg.vec_len << "\n";
    out << "link_prob = " << detail::fmt_double(cfg.link_prob) << "\n";
    out << "obs_prob = " << detail::fmt_double(cfg.obs_prob) << "\n";
    out << "transform = " << transform_name(cfg.transform) << "\n";
    out << "mu = " << detail::fmt_double(cfg.mu) << "\n";
    out << "noise_sigma = " << detail::fmt_double(cfg.noise_sigma) << "\n";
    out << "horizon = " << cfg.horizon << "\n";
    out << "switch_time = " << cfg.gates.switch_time << "\n";
    out << "eta = " << detail::fmt_double(cfg.gates.eta) << "\n";
    out << "alpha = " << detail::fmt_double(cfg.gates.alpha) << "\n";
    out << "eta_after = " << detail::fmt_double(cfg.gates.eta_after) << "\n";
    out << "alpha_after = " << detail::fmt_double(cfg.gates.alpha_after) << "\n";
    out << "beta1 = " << detail::fmt_double(cfg.schedule.beta1) << "\n";
    out << "beta0 = " << detail::fmt_double(cfg.schedule.beta0) << "\n";
    out << "tau = " << detail::fmt_double(cfg.schedule.tau) << "\n";
    out << "strategy = " << strategy_name(cfg.strategy) << "\n";
    out << "reps = " << cfg.reps << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "target_lo = " << detail::fmt_double(cfg.target.lo) << "\n";
    out << "target_hi = " << detail::fmt_double(cfg.target.hi) << "\n";
    out << "observability = " << observability_name(cfg.observability) << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Presets mirroring the four figure-style experiments.
// ---------------------------------------------------------------------------

inline std::vector<std::string> preset_names() {
    return {"time_partial", "time_full", "dct_low_noise", "dct_high_noise"};
}

inline ScenarioConfig preset_config(const std::string& name) {
    ScenarioConfig cfg;  // defaults are the desk-scale baseline
    if (name == "time_partial") {
        // defaults as-is: identity transform, partial observability
    } else if (name == "time_full") {
        cfg.observability = Observability::Full;
    } else if (name == "dct_low_noise") {
        cfg.transform = TransformKind::Dct;
    } else if (name == "dct_high_noise") {
        cfg.transform = TransformKind::Dct;
        cfg.noise_sigma = 0.3;
    } else {
        throw ConfigError("preset", "unknown preset '" + name + "'");
    }
    return cfg;
}

inline std::string preset_text(const std::string& name) {
    return serialize_config(preset_config(name));
}

// ---------------------------------------------------------------------------
// CSV and gnuplot artifacts. The CSV schema is fixed: header
// t,consensus_db,node0_local_db,...,node{N-1}_local_db; 9 significant digits;
// LF line endings.
// ---------------------------------------------------------------------------

namespace detail {

inline void append_g9(std::string& out, double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out += buf;
}

}  // namespace detail

inline std::string trace_csv(const MsdTrace& trace) {
    std::string out = "t,consensus_db";
    for (Eigen::Index i = 0; i < trace.local_msd_db.rows(); ++i)
        out += ",node" + std::to_string(i) + "_local_db";
    out += "\n";
    for (Eigen::Index t = 0; t < trace.consensus_msd_db.size(); ++t) {
        out += std::to_string(t + 1);
        out += ',';
        detail::append_g9(out, trace.consensus_msd_db[t]);
        for (Eigen::Index i = 0; i < trace.local_msd_db.rows(); ++i) {
            out += ',';
            detail::append_g9(out, trace.local_msd_db(i, t));
        }
        out += "\n";
    }
    return out;
}

struct ArmComparison {
    std::vector<std::string> labels;
    Mat consensus_db;  // horizon x arms
};

/// Runs every arm and aligns their consensus traces. Arms must agree on
/// vector length, node count, and horizon.
inline ArmComparison compare_arms(const std::vector<ScenarioConfig>& cfgs) {
    require(!cfgs.empty(), "compare_arms: need at least one arm");
    const auto& first = cfgs.front();
    for (const auto& cfg : cfgs) {
        require(cfg.vec_len == first.vec_len, "compare_arms: vec_len mismatch across arms");
        require(cfg.n_nodes == first.n_nodes, "compare_arms: n_nodes mismatch across arms");
        require(cfg.horizon == first.horizon, "compare_arms: horizon mismatch across arms");
    }

    ArmComparison cmp;
    cmp.consensus_db.resize(first.horizon, static_cast<Eigen::Index>(cfgs.size()));
    for (std::size_t a = 0; a < cfgs.size(); ++a) {
        std::string label = strategy_name(cfgs[a].strategy);
        int dup = 1;
        for (std::size_t b = 0; b < a; ++b)
            if (std::string(strategy_name(cfgs[b].strategy)) == label) ++dup;
        if (dup > 1) label += "_" + std::to_string(dup);
        cmp.labels.push_back(label);
        const MsdTrace trace = run_simulation(cfgs[a]);
        cmp.consensus_db.col(static_cast<Eigen::Index>(a)) = trace.consensus_msd_db;
    }
    return cmp;
}

inline std::string comparison_csv(const ArmComparison& cmp) {
    std::string out = "t";
    for (const auto& label : cmp.labels) out += "," + label;
    out += "\n";
    for (Eigen::Index t = 0; t < cmp.consensus_db.rows(); ++t) {
        out += std::to_string(t + 1);
        for (Eigen::Index a = 0; a < cmp.consensus_db.cols(); ++a) {
            out += ',';
            detail::append_g9(out, cmp.consensus_db(t, a));
        }
        out += "\n";
    }
    return out;
}

inline std::string trace_plot_script(const std::string& csv_name, int n_nodes) {
    std::string out;
    out += "# gnuplot script for " + csv_name + "\n";
    out += "set datafile separator ','\n";
    out += "set xlabel 'timestep'\n";
    out += "set ylabel 'MSD (dB)'\n";
    out += "set key outside\n";
    out += "plot '" + csv_name + "' using 1:2 with lines title 'consensus'";
    if (n_nodes > 0) out += ", \\\n     '" + csv_name + "' using 1:3 with lines title 'node 0 local'";
    out += "\n";
    return out;
}

inline std::string comparison_plot_script(const std::string& csv_name,
                                          const std::vector<std::string>& labels) {
    std::string out;
    out += "# gnuplot script for " + csv_name + "\n";
    out += "set datafile separator ','\n";
    out += "set xlabel 'timestep'\n";
    out += "set ylabel 'consensus MSD (dB)'\n";
    out += "set key outside\n";
    out += "plot ";
    for (std::size_t a = 0; a < labels.size(); ++a) {
        if (a) out += ", \\\n     ";
        out += "'" + csv_name + "' using 1:" + std::to_string(a + 2) + " with lines title '" +
               labels[a] + "'";
    }
    out += "\n";
    return out;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace detail

struct RunArtifacts {
    MsdTrace trace;
    std::filesystem::path csv_path;
    std::filesystem::path plot_path;
};

/// Runs the configured strategy and writes msd_<strategy>.csv plus a
/// matching gnuplot script into out_dir.
inline RunArtifacts run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
    RunArtifacts art;
    art.trace = run_simulation(cfg);
    std::filesystem::create_directories(out_dir);
    const std::string stem = std::string("msd_") + strategy_name(cfg.strategy);
    art.csv_path = out_dir / (stem + ".csv");
    art.plot_path = out_dir / (stem + ".gp");
    detail::write_file(art.csv_path, trace_csv(art.trace));
    detail::write_file(art.plot_path, trace_plot_script(stem + ".csv", cfg.n_nodes));
    return art;
}

struct CompareArtifacts {
    ArmComparison comparison;
    std::filesystem::path csv_path;
    std::filesystem::path plot_path;
};

inline CompareArtifacts compare_scenarios(const std::vector<ScenarioConfig>& cfgs,
                                          const std::filesystem::path& out_dir) {
    CompareArtifacts art;
    art.comparison = compare_arms(cfgs);
    std::filesystem::create_directories(out_dir);
    art.csv_path = out_dir / "compare.csv";
    art.plot_path = out_dir / "compare.gp";
    detail::write_file(art.csv_path, comparison_csv(art.comparison));
    detail::write_file(art.plot_path, comparison_plot_script("compare.csv", art.comparison.labels));
    return art;
}

}  // namespace diffusim
