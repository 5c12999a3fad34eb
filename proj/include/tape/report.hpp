// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tape/config.hpp"
#include "tape/errors.hpp"
#include "tape/metrics.hpp"
#include "tape/pipeline.hpp"

namespace tape {

inline constexpr const char* kVersion = "0.1.0";

struct LayerCoherence {
    int layer = 0;
    double mean_adjacent_jaccard = 1.0;
    double toggle_rate = 0.0;
};

// Full record of one experiment: the run's artifacts plus metrics computed
// against a paired all-active run with the same seed.
struct PipelineReport {
    PipelineConfig config;
    std::vector<double> per_timestep_rates;
    std::vector<int> selection_layers;
    std::vector<std::vector<std::size_t>> kept_counts;  // [timestep][layer]
    std::vector<LayerCoherence> coherence;              // per selection layer
    std::optional<LayerCoherence> coherence_overall;    // absent for 1-frame grids
    FlopReport flops;
    double output_deviation_mse = 0.0;
};

namespace detail {

inline std::vector<LayerCoherence> aggregate_coherence(const PipelineResult& run) {
    std::vector<LayerCoherence> per_layer;
    if (run.selected_masks.empty()) return per_layer;
    const std::size_t slots = run.selection_layers.size();
    for (std::size_t s = 0; s < slots; ++s) {
        LayerCoherence agg;
        agg.layer = run.selection_layers[s];
        double jaccard = 0.0, toggle = 0.0;
        for (const auto& per_t : run.selected_masks) {
            const CoherenceReport r = mask_jaccard_adjacent(per_t[s]);
            jaccard += r.mean_jaccard;
            toggle += r.toggle_rate;
        }
        const auto n = static_cast<double>(run.selected_masks.size());
        agg.mean_adjacent_jaccard = jaccard / n;
        agg.toggle_rate = toggle / n;
        per_layer.push_back(agg);
    }
    return per_layer;
}

}  // namespace detail

inline PipelineReport build_report(const PipelineConfig& cfg, const PipelineResult& run,
                                   const PipelineResult& unpruned) {
    PipelineReport report;
    report.config = cfg;
    report.per_timestep_rates = run.rates;
    report.selection_layers = run.selection_layers;
    for (const auto& per_layer : run.exec_masks) {
        std::vector<std::size_t> counts;
        counts.reserve(per_layer.size());
        for (const KeepMask& m : per_layer) counts.push_back(m.kept_count());
        report.kept_counts.push_back(std::move(counts));
    }
    if (cfg.shape.frames >= 2) {
        report.coherence = detail::aggregate_coherence(run);
        if (!report.coherence.empty()) {
            LayerCoherence overall;
            overall.layer = -1;
            double j = 0.0, tg = 0.0;
            for (const auto& c : report.coherence) {
                j += c.mean_adjacent_jaccard;
                tg += c.toggle_rate;
            }
            overall.mean_adjacent_jaccard = j / static_cast<double>(report.coherence.size());
            overall.toggle_rate = tg / static_cast<double>(report.coherence.size());
            report.coherence_overall = overall;
        }
    }
    report.flops = run.flops;
    double dev = 0.0;
    for (std::size_t t = 0; t < run.finals.size(); ++t) {
        dev += output_deviation(run.finals[t], unpruned.finals[t]);
    }
    report.output_deviation_mse = dev / static_cast<double>(run.finals.size());
    return report;
}

inline nlohmann::ordered_json config_to_json(const PipelineConfig& cfg) {
    nlohmann::ordered_json j;
    j["seed"] = cfg.seed;
    j["frames"] = cfg.shape.frames;
    j["height"] = cfg.shape.height;
    j["width"] = cfg.shape.width;
    j["dim"] = cfg.dim;
    j["dff"] = cfg.dff;
    j["heads"] = cfg.heads;
    j["layers"] = cfg.layers;
    j["timesteps"] = cfg.timesteps;
    j["policy"] = policy_name(cfg.policy);
    j["rho"] = cfg.rho;
    j["delta"] = cfg.delta;
    j["alpha"] = cfg.alpha;
    j["segments"] = cfg.segments;
    j["schedule"] = schedule_name(cfg.schedule);
    j["reselect-every"] = cfg.reselect_every;
    j["first-select-layer"] = cfg.first_select_layer;
    j["baseline-layers"] = cfg.baseline_layers;
    j["gamma"] = cfg.gamma;
    return j;
}

inline nlohmann::ordered_json report_to_json(const PipelineReport& report) {
    nlohmann::ordered_json j;
    j["version"] = kVersion;
    j["flop_convention"] = kFlopConvention;
    j["config"] = config_to_json(report.config);
    j["per_timestep_rates"] = report.per_timestep_rates;
    j["selection_layers"] = report.selection_layers;
    j["kept_counts"] = report.kept_counts;
    auto coh = nlohmann::ordered_json::array();
    for (const auto& c : report.coherence) {
        coh.push_back({{"layer", c.layer},
                       {"mean_adjacent_jaccard", c.mean_adjacent_jaccard},
                       {"toggle_rate", c.toggle_rate}});
    }
    j["coherence_per_selection_layer"] = coh;
    if (report.coherence_overall) {
        j["coherence_overall"] = {
            {"mean_adjacent_jaccard", report.coherence_overall->mean_adjacent_jaccard},
            {"toggle_rate", report.coherence_overall->toggle_rate}};
    } else {
        j["coherence_overall"] = nullptr;
    }
    j["flops"] = {{"attention_flops", report.flops.attention_flops},
                  {"projection_flops", report.flops.projection_flops},
                  {"mlp_flops", report.flops.mlp_flops},
                  {"total_flops", report.flops.total_flops},
                  {"baseline_total_flops", report.flops.baseline_total_flops},
                  {"speedup_proxy", report.flops.speedup_proxy}};
    j["output_deviation_mse"] = report.output_deviation_mse;
    return j;
}

inline std::string render_report(const PipelineReport& report) {
    return report_to_json(report).dump(2) + "\n";
}

// Paired evaluation: the deviation and speedup of a run are always measured
// against an all-active run with the same seed, so differences isolate the
// pruning policy.
inline PipelineConfig paired_none_config(PipelineConfig cfg) {
    cfg.policy = Policy::None;
    return cfg;
}

struct ExperimentOutput {
    PipelineReport report;
    PipelineResult run;
};

inline ExperimentOutput run_experiment(const PipelineConfig& cfg) {
    validate_config(cfg);
    PipelineResult run = run_pipeline(cfg);
    const PipelineResult unpruned =
        cfg.policy == Policy::None ? run : run_pipeline(paired_none_config(cfg));
    ExperimentOutput out{build_report(cfg, run, unpruned), std::move(run)};
    return out;
}

inline void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << body;
    if (!out) throw IoError("failed writing '" + path + "'");
}

// One text file per (timestep, selection layer, frame): H lines of W
// characters, '1' kept / '0' skipped.
inline std::size_t dump_masks(const PipelineResult& run, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec && !fs::is_directory(dir)) {
        throw IoError("cannot create dump directory '" + dir + "'");
    }
    auto pad2 = [](int v) {
        std::string s = std::to_string(v);
        return s.size() < 2 ? "0" + s : s;
    };
    std::size_t files = 0;
    for (std::size_t t = 0; t < run.selected_masks.size(); ++t) {
        for (std::size_t s = 0; s < run.selection_layers.size(); ++s) {
            const KeepMask& mask = run.selected_masks[t][s];
            const std::size_t per_frame = mask.shape.tokens_per_frame();
            for (int f = 0; f < mask.shape.frames; ++f) {
                std::string body;
                body.reserve(per_frame + static_cast<std::size_t>(mask.shape.height));
                for (int r = 0; r < mask.shape.height; ++r) {
                    const std::size_t base =
                        static_cast<std::size_t>(f) * per_frame +
                        static_cast<std::size_t>(r) * mask.shape.width;
                    for (int c = 0; c < mask.shape.width; ++c) {
                        body.push_back(mask.kept[base + c] ? '1' : '0');
                    }
                    body.push_back('\n');
                }
                const std::string name = "t" + pad2(static_cast<int>(t)) + "_l" +
                                         pad2(run.selection_layers[s]) + "_f" + pad2(f) +
                                         ".mask";
                write_text_file((fs::path(dir) / name).string(), body);
                ++files;
            }
        }
    }
    return files;
}

}  // namespace tape
