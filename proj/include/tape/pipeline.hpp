// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "tape/attention.hpp"
#include "tape/errors.hpp"
#include "tape/grid.hpp"
#include "tape/metrics.hpp"
#include "tape/policy.hpp"
#include "tape/rng.hpp"

namespace tape {

enum class Policy { None, Tape, AttentionBaseline };

struct PipelineConfig {
    std::uint64_t seed = 42;
    GridShape shape{8, 8, 8};
    int dim = 32;
    int dff = 64;
    int heads = 1;
    int layers = 12;
    int timesteps = 50;
    Policy policy = Policy::Tape;
    double rho = 0.30;
    double delta = 0.10;
    double alpha = 0.50;
    int segments = 5;
    BudgetSchedule::Shape schedule = BudgetSchedule::Shape::HighToLow;
    int reselect_every = 10;
    int first_select_layer = 0;
    std::vector<int> baseline_layers{2, 6, 10};
    double gamma = 0.90;

    BudgetSchedule budget_schedule() const {
        return BudgetSchedule{rho, delta, segments, timesteps, schedule};
    }
    ReselectionPlan reselection_plan() const {
        return ReselectionPlan{first_select_layer, reselect_every, layers};
    }
};

inline void validate_config(const PipelineConfig& cfg) {
    cfg.shape.validate();
    if (cfg.dim < 1) throw ConfigError("dim must be >= 1");
    if (cfg.dff < 1) throw ConfigError("dff must be >= 1");
    if (cfg.heads < 1 || cfg.dim % cfg.heads != 0) {
        throw ConfigError("dim must be divisible by heads");
    }
    if (cfg.layers < 1) throw ConfigError("layers must be >= 1");
    if (cfg.timesteps < 1) throw ConfigError("timesteps must be >= 1");
    cfg.budget_schedule().validate();
    if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw ConfigError("alpha must be in [0, 1]");
    cfg.reselection_plan().validate();
    if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) throw ConfigError("gamma must be in [0, 1]");
    if (cfg.policy == Policy::AttentionBaseline) {
        if (cfg.baseline_layers.empty()) {
            throw ConfigError("baseline-layers must not be empty for the attention baseline");
        }
        for (int l : cfg.baseline_layers) {
            if (l < 1 || l >= cfg.layers) {
                throw ConfigError("baseline-layers entries must be in [1, layers), got " +
                                  std::to_string(l));
            }
        }
        if (!std::is_sorted(cfg.baseline_layers.begin(), cfg.baseline_layers.end()) ||
            std::adjacent_find(cfg.baseline_layers.begin(), cfg.baseline_layers.end()) !=
                cfg.baseline_layers.end()) {
            throw ConfigError("baseline-layers must be strictly increasing");
        }
    }
}

// Everything one run produces before report assembly.
struct PipelineResult {
    std::vector<double> rates;                          // per timestep
    std::vector<int> selection_layers;                  // layer indices, ascending
    std::vector<std::vector<KeepMask>> exec_masks;      // [timestep][layer]
    std::vector<std::vector<KeepMask>> selected_masks;  // [timestep][selection slot]
    std::vector<LatentSequence> finals;                 // last-layer latents per timestep
    FlopReport flops;
};

namespace detail {

inline bool contains(const std::vector<int>& v, int x) {
    return std::binary_search(v.begin(), v.end(), x);
}

}  // namespace detail

// Runs `timesteps` independent denoising evaluations. Each timestep draws
// fresh latents from (seed, t), picks its prune rate from the schedule, and
// executes the layer stack under cumulative masks:
//
//   none:               every layer fully active; selection slots record
//                       all-kept masks so artifact layout matches a
//                       zero-rate run.
//   tape:               selection layers execute fully active (every token
//                       is scored), the received importance is temporally
//                       smoothed, and a fresh per-frame top-k mask takes
//                       effect from the next layer until the next selection.
//   attention-baseline: at each configured layer the previous layer's raw
//                       importance shrinks the kept set (keep rate compounds
//                       on the currently kept tokens); no smoothing, constant
//                       rate, masks only ever lose tokens.
template <class Counter>
PipelineResult run_pipeline_counted(const PipelineConfig& cfg, Counter& mc) {
    validate_config(cfg);

    const auto weights =
        init_weights(cfg.seed, cfg.layers, cfg.dim, cfg.dff, cfg.heads);
    const BudgetSchedule sched = cfg.budget_schedule();

    PipelineResult result;
    result.selection_layers = cfg.policy == Policy::AttentionBaseline
                                  ? cfg.baseline_layers
                                  : selection_layers(cfg.reselection_plan());

    const KeepMask full = KeepMask::all_kept(cfg.shape);
    std::vector<KeepMask> flat_masks;
    flat_masks.reserve(static_cast<std::size_t>(cfg.timesteps) * cfg.layers);

    for (int t = 0; t < cfg.timesteps; ++t) {
        const double rate = cfg.policy == Policy::None ? 0.0
                            : cfg.policy == Policy::Tape ? schedule_rate(t, sched)
                                                         : cfg.rho;
        result.rates.push_back(rate);

        LatentSequence seq = synth_latents(rng::derive_seed(cfg.seed, static_cast<std::uint64_t>(t)),
                                           cfg.shape, cfg.dim, cfg.gamma);
        KeepMask mask = full;
        ScoreField last_importance;
        std::vector<KeepMask>& exec = result.exec_masks.emplace_back();
        std::vector<KeepMask>& selected = result.selected_masks.emplace_back();
        exec.reserve(static_cast<std::size_t>(cfg.layers));

        for (int l = 0; l < cfg.layers; ++l) {
            const bool selecting = detail::contains(result.selection_layers, l);
            if (cfg.policy == Policy::AttentionBaseline && selecting) {
                mask = baseline_select(last_importance, rate, mask);
                selected.push_back(mask);
            }
            // Tape selection layers run fully active so every token can be
            // scored; the refreshed mask applies from the next layer on.
            const bool fully_active = cfg.policy != Policy::AttentionBaseline && selecting;
            const KeepMask& layer_mask = fully_active ? full : mask;

            AttentionOutput out = attention_forward_counted(seq, weights[l], layer_mask, mc);
            if (selecting && cfg.policy == Policy::Tape) {
                const ScoreField smoothed = temporal_smooth(out.received_importance, cfg.alpha);
                mask = select_per_frame(smoothed, rate);
                selected.push_back(mask);
            } else if (selecting && cfg.policy == Policy::None) {
                selected.push_back(full);
            }
            seq = mlp_forward_counted(out.updated, weights[l], layer_mask, mc);
            last_importance = std::move(out.received_importance);
            exec.push_back(layer_mask);
            flat_masks.push_back(layer_mask);
        }
        result.finals.push_back(std::move(seq));
    }

    result.flops = count_flops(flat_masks, cfg.dim, cfg.dff);
    return result;
}

inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
    NoopMulCounter mc;
    return run_pipeline_counted(cfg, mc);
}

// Recomputes the cost model for explicit per-(timestep, layer) masks,
// checking coverage against the config.
inline FlopReport count_flops(const PipelineConfig& cfg,
                              const std::vector<std::vector<KeepMask>>& exec_masks) {
    if (exec_masks.size() != static_cast<std::size_t>(cfg.timesteps)) {
        throw ContractError("masks do not cover every timestep");
    }
    std::vector<KeepMask> flat;
    for (const auto& per_layer : exec_masks) {
        if (per_layer.size() != static_cast<std::size_t>(cfg.layers)) {
            throw ContractError("masks do not cover every layer");
        }
        flat.insert(flat.end(), per_layer.begin(), per_layer.end());
    }
    return count_flops(flat, cfg.dim, cfg.dff);
}

}  // namespace tape
