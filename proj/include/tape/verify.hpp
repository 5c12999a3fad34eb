// SPDX-License-Identifier: Apache-2.0
#pragma once

// Built-in oracle checks, runnable from the CLI on small grids: the
// production attention kernel against a dense double-precision recomputation,
// the FLOP cost model against an instrumented multiply count of the real
// forward pass, baseline mask nesting, and the schedule-mean identity.

#include <cmath>
#include <string>
#include <vector>

#include "tape/config.hpp"
#include "tape/pipeline.hpp"
#include "tape/reference.hpp"

namespace tape {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline bool nested(const KeepMask& inner, const KeepMask& outer) {
    for (std::size_t i = 0; i < inner.kept.size(); ++i) {
        if (inner.kept[i] && !outer.kept[i]) return false;
    }
    return true;
}

}  // namespace detail

inline std::vector<CheckResult> verify_all(const PipelineConfig& cfg) {
    validate_config(cfg);
    if (cfg.shape.frames > 4 || cfg.shape.height > 4 || cfg.shape.width > 4 || cfg.dim > 16) {
        throw ConfigError("verify requires a grid of at most 4x4x4 tokens and dim <= 16");
    }
    if (cfg.timesteps % cfg.segments != 0) {
        throw ConfigError("verify requires segments dividing timesteps");
    }

    std::vector<CheckResult> checks;

    {
        CheckResult c{"dense-attention-oracle", true, ""};
        double worst = 0.0;
        const auto weights = init_weights(cfg.seed, cfg.layers, cfg.dim, cfg.dff, cfg.heads);
        for (int trial = 0; trial < 4; ++trial) {
            const LatentSequence seq = synth_latents(
                rng::derive_seed(cfg.seed, 9000 + static_cast<std::uint64_t>(trial)), cfg.shape,
                cfg.dim, cfg.gamma);
            const KeepMask mask = KeepMask::all_kept(cfg.shape);
            const auto& w = weights[static_cast<std::size_t>(trial) % weights.size()];
            const AttentionOutput out = attention_forward(seq, w, mask);
            const auto ref = reference::dense_attention(seq, w, mask);
            worst = std::max(worst, reference::relative_error(out, ref));
        }
        c.pass = worst <= 1e-5;
        c.detail = "max relative error " + detail::format_double(worst) + " (tolerance 1e-5)";
        checks.push_back(c);
    }

    {
        CheckResult c{"flop-model-vs-instrumented", true, ""};
        MulCounter tape_count, base_count;
        PipelineConfig tape_cfg = cfg;
        tape_cfg.policy = Policy::Tape;
        const PipelineResult tape_run = run_pipeline_counted(tape_cfg, tape_count);
        PipelineConfig base_cfg = cfg;
        base_cfg.policy = Policy::AttentionBaseline;
        const PipelineResult base_run = run_pipeline_counted(base_cfg, base_count);
        const bool tape_ok = 2 * tape_count.mults == tape_run.flops.total_flops;
        const bool base_ok = 2 * base_count.mults == base_run.flops.total_flops;
        c.pass = tape_ok && base_ok;
        c.detail = "tape " + std::to_string(2 * tape_count.mults) + " vs modeled " +
                   std::to_string(tape_run.flops.total_flops) + "; baseline " +
                   std::to_string(2 * base_count.mults) + " vs modeled " +
                   std::to_string(base_run.flops.total_flops);
        checks.push_back(c);
    }

    {
        CheckResult c{"baseline-nesting", true, ""};
        PipelineConfig base_cfg = cfg;
        base_cfg.policy = Policy::AttentionBaseline;
        const PipelineResult run = run_pipeline(base_cfg);
        for (const auto& per_layer : run.exec_masks) {
            for (std::size_t l = 1; l < per_layer.size(); ++l) {
                if (!detail::nested(per_layer[l], per_layer[l - 1])) c.pass = false;
            }
            for (const KeepMask& m : per_layer) {
                const std::size_t first = m.frame_kept_count(0);
                for (int f = 1; f < m.shape.frames; ++f) {
                    if (m.frame_kept_count(f) != first) c.pass = false;
                }
            }
        }
        c.detail = c.pass ? "kept sets shrink monotonically with equal per-frame counts"
                          : "nesting or per-frame balance violated";
        checks.push_back(c);
    }

    {
        CheckResult c{"schedule-mean", true, ""};
        double worst = 0.0;
        for (auto shape : {BudgetSchedule::Shape::Constant, BudgetSchedule::Shape::HighToLow,
                           BudgetSchedule::Shape::LowToHigh}) {
            BudgetSchedule sched = cfg.budget_schedule();
            sched.shape = shape;
            double mean = 0.0;
            for (int t = 0; t < sched.total_steps; ++t) mean += schedule_rate(t, sched);
            mean /= sched.total_steps;
            worst = std::max(worst, std::abs(mean - sched.rho));
        }
        c.pass = worst <= 1e-9;
        c.detail = "max |mean - rho| = " + detail::format_double(worst) + " (tolerance 1e-9)";
        checks.push_back(c);
    }

    return checks;
}

}  // namespace tape
