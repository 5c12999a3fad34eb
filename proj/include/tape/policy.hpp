// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "tape/errors.hpp"
#include "tape/grid.hpp"

namespace tape {

// Timestep -> prune-rate mapping. The rate starts at rho+delta (or rho-delta
// for the ascending shape), is held piecewise-constant over `segments` evenly
// spaced blocks of the denoising trajectory, and decays (or grows) linearly
// so the trajectory mean stays at rho.
struct BudgetSchedule {
    enum class Shape { Constant, HighToLow, LowToHigh };

    double rho = 0.0;
    double delta = 0.0;
    int segments = 1;
    int total_steps = 1;
    Shape shape = Shape::HighToLow;

    void validate() const {
        if (!(rho >= 0.0 && rho < 1.0)) {
            throw ConfigError("rho must be in [0, 1), got " + std::to_string(rho));
        }
        if (delta < 0.0) throw ConfigError("delta must be >= 0, got " + std::to_string(delta));
        if (!(rho + delta < 1.0)) throw ConfigError("rho + delta must be < 1");
        if (rho - delta < 0.0) throw ConfigError("rho - delta must be >= 0");
        if (segments < 1) throw ConfigError("segments must be >= 1");
        if (total_steps < 1) throw ConfigError("timesteps must be >= 1");
    }
};

inline double schedule_rate(int t, const BudgetSchedule& sched) {
    if (t < 0 || t >= sched.total_steps) {
        throw RangeError("timestep " + std::to_string(t) + " outside [0, " +
                         std::to_string(sched.total_steps) + ")");
    }
    if (sched.shape == BudgetSchedule::Shape::Constant || sched.segments == 1) {
        return sched.rho;
    }
    const auto seg = static_cast<int>(static_cast<long long>(t) * sched.segments /
                                      sched.total_steps);
    const int clamped = std::min(seg, sched.segments - 1);
    const double step = 2.0 * sched.delta * clamped / (sched.segments - 1);
    return sched.shape == BudgetSchedule::Shape::HighToLow ? (sched.rho + sched.delta) - step
                                                           : (sched.rho - sched.delta) + step;
}

// Layers at which tokens are (re)selected: first_layer, then every `period`
// layers, clipped to the stack depth.
struct ReselectionPlan {
    int first_layer = 0;
    int period = 10;
    int total_layers = 1;

    void validate() const {
        if (period < 1) throw ConfigError("reselect-every must be >= 1");
        if (first_layer < 0 || first_layer >= total_layers) {
            throw ConfigError("first-select-layer must be in [0, layers)");
        }
    }
};

inline std::vector<int> selection_layers(const ReselectionPlan& plan) {
    plan.validate();
    std::vector<int> layers;
    for (long long l = plan.first_layer; l < plan.total_layers; l += plan.period) {
        layers.push_back(static_cast<int>(l));
    }
    return layers;
}

// Blends each token's score with the score of the same spatial position in
// the previous frame: out[n] = alpha*raw[n] + (1-alpha)*raw[n-1]. The blend
// reads raw previous-frame scores (no recursion); frame 0 passes through.
inline ScoreField temporal_smooth(const ScoreField& raw, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw ConfigError("alpha must be in [0, 1], got " + std::to_string(alpha));
    }
    if (!raw.all_finite()) throw ContractError("scores must be finite");
    ScoreField out(raw.shape);
    const std::size_t per_frame = raw.shape.tokens_per_frame();
    for (std::size_t p = 0; p < per_frame; ++p) out.values[p] = raw.values[p];
    for (int n = 1; n < raw.shape.frames; ++n) {
        const std::size_t base = static_cast<std::size_t>(n) * per_frame;
        for (std::size_t p = 0; p < per_frame; ++p) {
            out.values[base + p] =
                alpha * raw.values[base + p] + (1.0 - alpha) * raw.values[base - per_frame + p];
        }
    }
    return out;
}

namespace detail {

// Keep-count rounding: round-half-up, floored at one token per frame so
// attention stays well defined everywhere.
inline std::size_t keep_count(double keep_fraction, std::size_t pool) {
    const auto k = static_cast<std::size_t>(
        std::floor(keep_fraction * static_cast<double>(pool) + 0.5));
    return std::max<std::size_t>(1, k);
}

// Sorts candidate token indices by score descending, lower index first on ties.
inline void rank_by_score(std::vector<TokenIndex>& ids, const ScoreField& scores) {
    std::sort(ids.begin(), ids.end(), [&](TokenIndex a, TokenIndex b) {
        if (scores.values[a] != scores.values[b]) return scores.values[a] > scores.values[b];
        return a < b;
    });
}

}  // namespace detail

// Keeps the same number of highest-scoring tokens in every frame, so no frame
// is pruned harder than its neighbors.
inline KeepMask select_per_frame(const ScoreField& scores, double prune_rate) {
    if (!(prune_rate >= 0.0 && prune_rate < 1.0)) {
        throw ConfigError("prune rate must be in [0, 1), got " + std::to_string(prune_rate));
    }
    const std::size_t per_frame = scores.shape.tokens_per_frame();
    const std::size_t k = detail::keep_count(1.0 - prune_rate, per_frame);
    KeepMask mask(scores.shape, false);
    std::vector<TokenIndex> ids(per_frame);
    for (int f = 0; f < scores.shape.frames; ++f) {
        const std::size_t base = static_cast<std::size_t>(f) * per_frame;
        std::iota(ids.begin(), ids.end(), base);
        detail::rank_by_score(ids, scores);
        for (std::size_t i = 0; i < k; ++i) mask.set(ids[i], true);
    }
    return mask;
}

// Cumulative selector: shrinks the previous kept set per frame by the stage
// keep rate (round-half-up of (1-prune_rate) times the currently kept count),
// ranking only currently kept tokens by raw score. Once skipped, a token
// stays skipped.
inline KeepMask baseline_select(const ScoreField& scores, double prune_rate,
                                const KeepMask& previous) {
    if (!(prune_rate >= 0.0 && prune_rate < 1.0)) {
        throw ConfigError("prune rate must be in [0, 1), got " + std::to_string(prune_rate));
    }
    if (scores.shape != previous.shape) throw ContractError("scores and mask shapes differ");
    const std::size_t per_frame = scores.shape.tokens_per_frame();
    KeepMask mask(scores.shape, false);
    std::vector<TokenIndex> ids;
    for (int f = 0; f < scores.shape.frames; ++f) {
        const std::size_t base = static_cast<std::size_t>(f) * per_frame;
        ids.clear();
        for (std::size_t p = 0; p < per_frame; ++p) {
            if (previous.is_kept(base + p)) ids.push_back(base + p);
        }
        const std::size_t k = detail::keep_count(1.0 - prune_rate, ids.size());
        if (k > ids.size()) {
            throw ContractError("requested keep count " + std::to_string(k) +
                                " exceeds currently kept " + std::to_string(ids.size()));
        }
        detail::rank_by_score(ids, scores);
        for (std::size_t i = 0; i < k; ++i) mask.set(ids[i], true);
    }
    return mask;
}

}  // namespace tape
