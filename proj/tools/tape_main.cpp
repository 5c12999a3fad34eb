// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: run one experiment, sweep a parameter, dump
// per-frame mask files, or run the built-in oracle checks.

#include <cstdio>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "tape/tape.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitVerifyFailed = 4;

struct FlagSet {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> pairs;
};

void add_config_options(CLI::App* sub, FlagSet& flags) {
    sub->add_option("--config", flags.config_path, "config file, key=value per line");
    static const std::vector<std::pair<const char*, const char*>> kOptions = {
        {"--seed", "seed"},
        {"--frames", "frames"},
        {"--height", "height"},
        {"--width", "width"},
        {"--dim", "dim"},
        {"--dff", "dff"},
        {"--heads", "heads"},
        {"--layers", "layers"},
        {"--timesteps", "timesteps"},
        {"--policy", "policy"},
        {"--rho", "rho"},
        {"--delta", "delta"},
        {"--segments", "segments"},
        {"--schedule", "schedule"},
        {"--alpha", "alpha"},
        {"--reselect-every", "reselect-every"},
        {"--first-select-layer", "first-select-layer"},
        {"--baseline-layers", "baseline-layers"},
        {"--gamma", "gamma"},
    };
    for (const auto& [flag, key] : kOptions) {
        const std::string key_copy = key;
        sub->add_option_function<std::string>(
            flag,
            [&flags, key_copy](const std::string& value) {
                flags.pairs.emplace_back(key_copy, value);
            },
            std::string("config key ") + key);
    }
}

tape::PipelineConfig build_config(const FlagSet& flags, tape::PipelineConfig base) {
    if (!flags.config_path.empty()) tape::apply_config_file(base, flags.config_path);
    for (const auto& [key, value] : flags.pairs) tape::apply_config_key(base, key, value);
    tape::validate_config(base);
    return base;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = s.find(',', pos);
        out.push_back(s.substr(pos, comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

void emit(const std::string& body, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << body;
    } else {
        tape::write_text_file(out_path, body);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"token pruning simulator for spatiotemporal transformer stacks"};
    app.require_subcommand(1);

    FlagSet run_flags, sweep_flags, dump_flags, verify_flags;
    std::string run_out, run_dump_dir, sweep_out, sweep_param, sweep_values, dump_dir;

    CLI::App* run_cmd = app.add_subcommand("run", "run one experiment and write its report");
    add_config_options(run_cmd, run_flags);
    run_cmd->add_option("--out", run_out, "report path (stdout if omitted)");
    run_cmd->add_option("--dump-dir", run_dump_dir, "also dump selected masks here");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run one experiment per parameter value");
    add_config_options(sweep_cmd, sweep_flags);
    sweep_cmd->add_option("--param", sweep_param, "alpha|reselect-every|schedule|rho")
        ->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated value list")->required();
    sweep_cmd->add_option("--out", sweep_out, "CSV path (stdout if omitted)");

    CLI::App* dump_cmd = app.add_subcommand("dump-masks", "write per-frame mask files");
    add_config_options(dump_cmd, dump_flags);
    dump_cmd->add_option("--dump-dir", dump_dir, "output directory")->required();

    CLI::App* verify_cmd =
        app.add_subcommand("verify", "run built-in oracle checks on a small grid");
    add_config_options(verify_cmd, verify_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (run_cmd->parsed()) {
            const tape::PipelineConfig cfg = build_config(run_flags, tape::PipelineConfig{});
            const tape::ExperimentOutput out = tape::run_experiment(cfg);
            emit(tape::render_report(out.report), run_out);
            if (!run_dump_dir.empty()) tape::dump_masks(out.run, run_dump_dir);
        } else if (sweep_cmd->parsed()) {
            const tape::PipelineConfig cfg = build_config(sweep_flags, tape::PipelineConfig{});
            const std::string csv =
                tape::sweep(cfg, tape::parse_sweep_param(sweep_param), split_csv(sweep_values));
            emit(csv, sweep_out);
        } else if (dump_cmd->parsed()) {
            const tape::PipelineConfig cfg = build_config(dump_flags, tape::PipelineConfig{});
            const tape::PipelineResult run = tape::run_pipeline(cfg);
            const std::size_t files = tape::dump_masks(run, dump_dir);
            std::cout << files << " mask files written to " << dump_dir << "\n";
        } else if (verify_cmd->parsed()) {
            tape::PipelineConfig small;
            small.shape = tape::GridShape{3, 3, 3};
            small.dim = 8;
            small.dff = 16;
            small.layers = 6;
            small.timesteps = 4;
            small.segments = 2;
            small.reselect_every = 2;
            small.baseline_layers = {2, 4};
            const tape::PipelineConfig cfg = build_config(verify_flags, small);
            const auto checks = tape::verify_all(cfg);
            bool all_pass = true;
            for (const auto& c : checks) {
                std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail
                          << "\n";
                all_pass = all_pass && c.pass;
            }
            if (!all_pass) return kExitVerifyFailed;
        }
    } catch (const tape::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const tape::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitOk;
}
