// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tape/config.hpp"
#include "tape/errors.hpp"
#include "tape/report.hpp"

namespace tape {

enum class SweepParam { Alpha, ReselectEvery, Schedule, Rho };

inline SweepParam parse_sweep_param(std::string_view s) {
    if (s == "alpha") return SweepParam::Alpha;
    if (s == "reselect-every") return SweepParam::ReselectEvery;
    if (s == "schedule") return SweepParam::Schedule;
    if (s == "rho") return SweepParam::Rho;
    throw ConfigError("sweep parameter must be one of alpha|reselect-every|schedule|rho, got '" +
                      std::string(s) + "'");
}

inline const char* sweep_param_name(SweepParam p) {
    switch (p) {
        case SweepParam::Alpha: return "alpha";
        case SweepParam::ReselectEvery: return "reselect-every";
        case SweepParam::Schedule: return "schedule";
        case SweepParam::Rho: return "rho";
    }
    return "?";
}

namespace detail {

inline void apply_sweep_value(PipelineConfig& cfg, SweepParam param, const std::string& value) {
    switch (param) {
        case SweepParam::Alpha: cfg.alpha = parse_double("alpha", value); break;
        case SweepParam::ReselectEvery:
            cfg.reselect_every = static_cast<int>(parse_int("reselect-every", value));
            break;
        case SweepParam::Schedule: cfg.schedule = parse_schedule(value); break;
        case SweepParam::Rho: cfg.rho = parse_double("rho", value); break;
    }
}

}  // namespace detail

// One experiment per value, all against a shared all-active reference run.
// Rows are emitted in input order. CSV columns: swept value, mean adjacent
// jaccard, toggle rate, modeled total FLOPs, speedup proxy, deviation.
inline std::string sweep(const PipelineConfig& base, SweepParam param,
                         const std::vector<std::string>& values) {
    if (values.empty()) throw ConfigError("sweep requires a non-empty value list");
    if (base.policy == Policy::None) {
        throw ConfigError("policy none has no sweepable parameter");
    }
    if (base.policy == Policy::AttentionBaseline && param != SweepParam::Rho) {
        throw ConfigError(std::string("parameter '") + sweep_param_name(param) +
                          "' does not apply to the attention-baseline policy");
    }

    // The paired all-active run ignores every swept parameter, so compute it once.
    const PipelineResult unpruned = run_pipeline(paired_none_config(base));

    std::string csv = std::string(sweep_param_name(param)) +
                      ",mean_adjacent_jaccard,toggle_rate,total_flops,speedup_proxy,"
                      "output_deviation_mse\n";
    for (const std::string& value : values) {
        PipelineConfig cfg = base;
        detail::apply_sweep_value(cfg, param, value);
        validate_config(cfg);
        const PipelineResult run = run_pipeline(cfg);
        const PipelineReport report = build_report(cfg, run, unpruned);
        const double jaccard = report.coherence_overall
                                   ? report.coherence_overall->mean_adjacent_jaccard
                                   : std::numeric_limits<double>::quiet_NaN();
        const double toggle = report.coherence_overall ? report.coherence_overall->toggle_rate
                                                       : std::numeric_limits<double>::quiet_NaN();
        csv += value;
        csv += ',' + detail::format_double(jaccard);
        csv += ',' + detail::format_double(toggle);
        csv += ',' + std::to_string(report.flops.total_flops);
        csv += ',' + detail::format_double(report.flops.speedup_proxy);
        csv += ',' + detail::format_double(report.output_deviation_mse);
        csv += '\n';
    }
    return csv;
}

}  // namespace tape
