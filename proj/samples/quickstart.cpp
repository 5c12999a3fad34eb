// SPDX-License-Identifier: Apache-2.0
//
// Minimal library usage: run a pruned stack and its all-active twin, then
// print the modeled speedup, the output drift, and the mask coherence.

#include <iostream>

#include "tape/tape.hpp"

int main() {
    tape::PipelineConfig cfg;
    cfg.shape = tape::GridShape{4, 4, 4};
    cfg.dim = 16;
    cfg.dff = 32;
    cfg.layers = 8;
    cfg.timesteps = 10;
    cfg.segments = 5;
    cfg.reselect_every = 4;
    cfg.rho = 0.3;

    const tape::ExperimentOutput out = tape::run_experiment(cfg);
    std::cout << "speedup proxy:   " << out.report.flops.speedup_proxy << "\n";
    std::cout << "output MSE:      " << out.report.output_deviation_mse << "\n";
    if (out.report.coherence_overall) {
        std::cout << "mask jaccard:    " << out.report.coherence_overall->mean_adjacent_jaccard
                  << "\n";
    }

    // The pieces compose outside the pipeline too: smooth any score field,
    // pick per-frame top-k masks, and measure their frame-to-frame overlap.
    tape::ScoreField scores(cfg.shape);
    for (std::size_t i = 0; i < scores.values.size(); ++i) {
        scores.values[i] = tape::rng::normal_at(7, tape::rng::kStreamTest, i);
    }
    const tape::ScoreField smoothed = tape::temporal_smooth(scores, 0.5);
    const tape::KeepMask mask = tape::select_per_frame(smoothed, 0.3);
    std::cout << "standalone mask jaccard: "
              << tape::mask_jaccard_adjacent(mask).mean_jaccard << "\n";
    return 0;
}
