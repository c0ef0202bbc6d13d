// Command-line front end: run one scenario, compare arms, or manage presets.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric error.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diffusim/diffusim.hpp"

namespace {

// Seed precedence: --seed flag, then the config file's seed key, then the
// DIFFUSIM_SEED environment variable, then the built-in default.
void apply_overrides(diffusim::ScenarioConfig& cfg, bool seed_given, std::uint64_t seed_value,
                     bool reps_given, int reps_value) {
    if (seed_given) {
        cfg.seed = seed_value;
    } else if (!cfg.seed_from_file) {
        if (const char* env = std::getenv("DIFFUSIM_SEED")) {
            cfg.seed = diffusim::detail::parse_u64("DIFFUSIM_SEED", env);
        }
    }
    if (reps_given) {
        cfg.reps = reps_value;
        cfg.validate();
    }
}

void print_summary(const diffusim::ScenarioConfig& cfg, const diffusim::RunArtifacts& art) {
    std::printf("strategy=%s reps=%d horizon=%ld seed=%llu\n", diffusim::strategy_name(cfg.strategy),
                cfg.reps, cfg.horizon, static_cast<unsigned long long>(cfg.seed));
    if (art.trace.consensus_msd_db.size() > 0)
        std::printf("final consensus MSD: %.2f dB\n",
                    art.trace.consensus_msd_db[art.trace.consensus_msd_db.size() - 1]);
    std::printf("wrote %s\n", art.csv_path.string().c_str());
    std::printf("wrote %s\n", art.plot_path.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"diffusim: diffusion-LMS estimation under partial target observability"};
    app.require_subcommand(1);

    std::string out_dir = ".";
    std::uint64_t seed_value = 0;
    int reps_value = 0;

    auto* run_cmd = app.add_subcommand("run", "run one scenario config and write CSV + plot script");
    std::string run_config;
    run_cmd->add_option("config", run_config, "path to a key = value config file")->required();
    auto* run_seed = run_cmd->add_option("--seed", seed_value, "override the seed");
    auto* run_reps = run_cmd->add_option("--reps", reps_value, "override the repetition count");
    run_cmd->add_option("--out", out_dir, "output directory (default .)");

    auto* cmp_cmd = app.add_subcommand("compare", "run several configs and write an aligned CSV");
    std::vector<std::string> cmp_configs;
    cmp_cmd->add_option("configs", cmp_configs, "config files, one per arm")->required();
    auto* cmp_seed = cmp_cmd->add_option("--seed", seed_value, "override every arm's seed");
    auto* cmp_reps = cmp_cmd->add_option("--reps", reps_value, "override every arm's repetitions");
    cmp_cmd->add_option("--out", out_dir, "output directory (default .)");

    auto* presets_cmd = app.add_subcommand("presets", "list or emit the built-in presets");
    auto* list_cmd = presets_cmd->add_subcommand("list", "list preset names");
    auto* emit_cmd = presets_cmd->add_subcommand("emit", "print a preset config to stdout");
    std::string preset_name;
    emit_cmd->add_option("name", preset_name, "preset name")->required();
    presets_cmd->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            auto cfg = diffusim::parse_config_file(run_config);
            apply_overrides(cfg, run_seed->count() > 0, seed_value, run_reps->count() > 0,
                            reps_value);
            const auto art = diffusim::run_scenario(cfg, out_dir);
            print_summary(cfg, art);
        } else if (cmp_cmd->parsed()) {
            std::vector<diffusim::ScenarioConfig> cfgs;
            cfgs.reserve(cmp_configs.size());
            for (const auto& path : cmp_configs) {
                auto cfg = diffusim::parse_config_file(path);
                apply_overrides(cfg, cmp_seed->count() > 0, seed_value, cmp_reps->count() > 0,
                                reps_value);
                cfgs.push_back(cfg);
            }
            const auto art = diffusim::compare_scenarios(cfgs, out_dir);
            std::printf("arms:");
            for (const auto& label : art.comparison.labels) std::printf(" %s", label.c_str());
            std::printf("\nwrote %s\nwrote %s\n", art.csv_path.string().c_str(),
                        art.plot_path.string().c_str());
        } else if (list_cmd->parsed()) {
            for (const auto& name : diffusim::preset_names()) std::printf("%s\n", name.c_str());
        } else if (emit_cmd->parsed()) {
            std::fputs(diffusim::preset_text(preset_name).c_str(), stdout);
        }
    } catch (const diffusim::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const diffusim::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    }
    return 0;
}
