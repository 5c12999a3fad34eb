// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tape/attention.hpp"
#include "tape/errors.hpp"
#include "tape/grid.hpp"

namespace tape {

// Cross-frame stability of one mask: Jaccard overlap of kept spatial
// positions for each adjacent frame pair, and the fraction of positions whose
// kept state flips between adjacent frames.
struct CoherenceReport {
    std::vector<double> adjacent_jaccard;
    double mean_jaccard = 1.0;
    double toggle_rate = 0.0;
};

inline CoherenceReport mask_jaccard_adjacent(const KeepMask& mask) {
    if (mask.shape.frames < 2) {
        throw ContractError("coherence needs at least 2 frames");
    }
    const std::size_t per_frame = mask.shape.tokens_per_frame();
    CoherenceReport report;
    std::size_t toggles = 0;
    double jaccard_sum = 0.0;
    for (int n = 0; n + 1 < mask.shape.frames; ++n) {
        const std::size_t a = static_cast<std::size_t>(n) * per_frame;
        const std::size_t b = a + per_frame;
        std::size_t inter = 0, uni = 0;
        for (std::size_t p = 0; p < per_frame; ++p) {
            const bool ka = mask.kept[a + p] != 0;
            const bool kb = mask.kept[b + p] != 0;
            inter += ka && kb;
            uni += ka || kb;
            toggles += ka != kb;
        }
        const double j = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
        report.adjacent_jaccard.push_back(j);
        jaccard_sum += j;
    }
    report.mean_jaccard = jaccard_sum / static_cast<double>(report.adjacent_jaccard.size());
    report.toggle_rate = static_cast<double>(toggles) /
                         static_cast<double>(per_frame * (mask.shape.frames - 1));
    return report;
}

// FLOP model for one run. Convention: a multiply-accumulate counts as 2
// FLOPs; only matrix products are counted (softmax, the 1/sqrt(d) scaling,
// residual adds, and score normalization are excluded).
inline constexpr const char* kFlopConvention =
    "multiply-accumulate = 2 FLOPs; matrix products only "
    "(softmax, scaling, residuals and normalization excluded)";

struct FlopReport {
    std::uint64_t attention_flops = 0;   // the two N_a^2 * d products
    std::uint64_t projection_flops = 0;  // q/k/v/output projections
    std::uint64_t mlp_flops = 0;
    std::uint64_t total_flops = 0;
    std::uint64_t baseline_total_flops = 0;  // same stack with every token active
    double speedup_proxy = 1.0;
};

namespace detail {

struct LayerFlops {
    std::uint64_t attention = 0;
    std::uint64_t projection = 0;
    std::uint64_t mlp = 0;
    std::uint64_t total() const { return attention + projection + mlp; }
};

inline LayerFlops layer_flops(std::uint64_t n_active, std::uint64_t d, std::uint64_t dff) {
    LayerFlops f;
    f.projection = 3 * 2 * n_active * d * d + 2 * n_active * d * d;
    f.attention = 2 * n_active * n_active * d + 2 * n_active * n_active * d;
    f.mlp = 2 * (2 * n_active * d * dff);
    return f;
}

}  // namespace detail

// Computes the modeled cost of a run from the per-layer activity masks (one
// mask per executed layer, in execution order). The baseline is the same
// layer count with all tokens active.
inline FlopReport count_flops(const std::vector<KeepMask>& per_layer_masks, int dim, int dff) {
    if (per_layer_masks.empty()) throw ContractError("no masks supplied");
    FlopReport report;
    const auto d = static_cast<std::uint64_t>(dim);
    const auto f = static_cast<std::uint64_t>(dff);
    for (const KeepMask& mask : per_layer_masks) {
        const auto active = static_cast<std::uint64_t>(mask.kept_count());
        const auto layer = detail::layer_flops(active, d, f);
        report.attention_flops += layer.attention;
        report.projection_flops += layer.projection;
        report.mlp_flops += layer.mlp;
        const auto full =
            detail::layer_flops(static_cast<std::uint64_t>(mask.shape.total_tokens()), d, f);
        report.baseline_total_flops += full.total();
    }
    report.total_flops = report.attention_flops + report.projection_flops + report.mlp_flops;
    report.speedup_proxy = static_cast<double>(report.baseline_total_flops) /
                           static_cast<double>(report.total_flops);
    return report;
}

// Mean squared error between two equally shaped latent sequences.
inline double output_deviation(const LatentSequence& pruned, const LatentSequence& baseline) {
    if (pruned.shape != baseline.shape || pruned.dim != baseline.dim) {
        throw ContractError("latent sequences differ in shape");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < pruned.features.size(); ++i) {
        const double diff = static_cast<double>(pruned.features[i]) -
                            static_cast<double>(baseline.features[i]);
        acc += diff * diff;
    }
    return acc / static_cast<double>(pruned.features.size());
}

}  // namespace tape
