// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "tape/metrics.hpp"
#include "tape/pipeline.hpp"
#include "tape/report.hpp"
#include "tape/rng.hpp"
#include "test_util.hpp"

using namespace tape;

namespace {

KeepMask mask_from_rows(const GridShape& shape, const std::vector<std::vector<int>>& kept) {
    KeepMask mask(shape, false);
    const std::size_t per_frame = shape.tokens_per_frame();
    for (std::size_t f = 0; f < kept.size(); ++f) {
        for (int p : kept[f]) mask.set(f * per_frame + static_cast<std::size_t>(p), true);
    }
    return mask;
}

KeepMask reversed_frames(const KeepMask& mask) {
    KeepMask out(mask.shape, false);
    const std::size_t per_frame = mask.shape.tokens_per_frame();
    for (int f = 0; f < mask.shape.frames; ++f) {
        const std::size_t src = static_cast<std::size_t>(f) * per_frame;
        const std::size_t dst =
            static_cast<std::size_t>(mask.shape.frames - 1 - f) * per_frame;
        for (std::size_t p = 0; p < per_frame; ++p) out.kept[dst + p] = mask.kept[src + p];
    }
    return out;
}

}  // namespace

TEST_CASE("adjacent-frame jaccard and toggle rate") {
    const GridShape shape{2, 1, 4};
    SECTION("partial overlap") {
        const KeepMask mask = mask_from_rows(shape, {{0, 1, 2}, {1, 2, 3}});
        const CoherenceReport r = mask_jaccard_adjacent(mask);
        CHECK(r.adjacent_jaccard == std::vector<double>{0.5});  // {1,2} over {0,1,2,3}
        CHECK(r.toggle_rate == 0.5);
    }
    SECTION("identical frames") {
        const KeepMask mask = mask_from_rows(shape, {{0, 3}, {0, 3}});
        const CoherenceReport r = mask_jaccard_adjacent(mask);
        CHECK(r.mean_jaccard == 1.0);
        CHECK(r.toggle_rate == 0.0);
    }
    SECTION("disjoint halves") {
        const KeepMask mask = mask_from_rows(shape, {{0, 1}, {2, 3}});
        const CoherenceReport r = mask_jaccard_adjacent(mask);
        CHECK(r.mean_jaccard == 0.0);
        CHECK(r.toggle_rate == 1.0);
    }
    SECTION("a single frame has no adjacent pair") {
        CHECK_THROWS_AS(mask_jaccard_adjacent(KeepMask::all_kept(GridShape{1, 2, 2})),
                        ContractError);
    }
}

TEST_CASE("coherence is invariant under frame reversal") {
    const GridShape shape{5, 2, 3};
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        const ScoreField scores = test_util::coherent_scores(700 + trial, shape);
        const KeepMask mask = select_per_frame(scores, 0.4);
        const CoherenceReport a = mask_jaccard_adjacent(mask);
        const CoherenceReport b = mask_jaccard_adjacent(reversed_frames(mask));
        CHECK(a.mean_jaccard == Catch::Approx(b.mean_jaccard).epsilon(1e-12));
        CHECK(a.toggle_rate == Catch::Approx(b.toggle_rate).epsilon(1e-12));
    }
}

TEST_CASE("flop model single-layer arithmetic") {
    // N_a=2, d=4, dff=8: 192 projection + 32 scores + 32 attention*values
    // + 64 output projection + 256 mlp = 576
    const GridShape shape{1, 1, 2};
    const FlopReport r = count_flops({KeepMask::all_kept(shape)}, 4, 8);
    CHECK(r.projection_flops == 192 + 64);
    CHECK(r.attention_flops == 32 + 32);
    CHECK(r.mlp_flops == 256);
    CHECK(r.total_flops == 576);
    CHECK(r.speedup_proxy == 1.0);
}

TEST_CASE("quadratic attention terms shrink with the square of the active count") {
    const GridShape shape{2, 2, 2};
    KeepMask minimal(shape, false);
    minimal.set(0, true);
    minimal.set(4, true);  // one token per frame
    const FlopReport full = count_flops({KeepMask::all_kept(shape)}, 8, 16);
    const FlopReport lean = count_flops({minimal}, 8, 16);
    const double ratio = static_cast<double>(lean.attention_flops) /
                         static_cast<double>(full.attention_flops);
    CHECK(ratio == (2.0 / 8.0) * (2.0 / 8.0));
    CHECK(static_cast<double>(lean.projection_flops) /
              static_cast<double>(full.projection_flops) ==
          2.0 / 8.0);
}

TEST_CASE("flop model is monotone in active counts") {
    const GridShape shape{2, 2, 2};
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        KeepMask big(shape, false), small(shape, false);
        for (std::size_t i = 0; i < big.kept.size(); ++i) {
            const bool in_big = rng::counter_hash(3, trial, i) % 4 != 0;
            big.kept[i] = in_big;
            small.kept[i] = in_big && (rng::counter_hash(4, trial, i) % 2 == 0);
        }
        const FlopReport fb = count_flops({big}, 8, 16);
        const FlopReport fs = count_flops({small}, 8, 16);
        CHECK(fs.total_flops <= fb.total_flops);
        CHECK(fb.total_flops <= fb.baseline_total_flops);
    }
}

TEST_CASE("flop model equals the instrumented multiply count") {
    PipelineConfig cfg;
    cfg.shape = GridShape{3, 3, 3};
    cfg.dim = 8;
    cfg.dff = 16;
    cfg.heads = 2;
    cfg.layers = 5;
    cfg.timesteps = 4;
    cfg.segments = 2;
    cfg.reselect_every = 2;
    cfg.baseline_layers = {1, 3};
    for (Policy policy : {Policy::Tape, Policy::AttentionBaseline, Policy::None}) {
        cfg.policy = policy;
        MulCounter mc;
        const PipelineResult run = run_pipeline_counted(cfg, mc);
        CHECK(2 * mc.mults == run.flops.total_flops);
        CHECK(count_flops(cfg, run.exec_masks).total_flops == run.flops.total_flops);
    }
}

TEST_CASE("count_flops validates mask coverage") {
    PipelineConfig cfg;
    cfg.shape = GridShape{2, 2, 2};
    cfg.dim = 4;
    cfg.dff = 8;
    cfg.layers = 3;
    cfg.timesteps = 2;
    cfg.segments = 1;
    CHECK_THROWS_AS(count_flops(cfg, {}), ContractError);
    CHECK_THROWS_AS(count_flops(std::vector<KeepMask>{}, 4, 8), ContractError);
}

TEST_CASE("output deviation is a mean squared error") {
    const GridShape shape{2, 2, 2};
    LatentSequence a(shape, 3), b(shape, 3);
    for (std::size_t i = 0; i < a.features.size(); ++i) {
        a.features[i] = 0.125f * static_cast<float>(i);
        b.features[i] = a.features[i];
    }
    CHECK(output_deviation(a, b) == 0.0);
    for (auto& v : b.features) v += 1.0f;
    CHECK(output_deviation(a, b) == Catch::Approx(1.0).margin(1e-12));
    CHECK_THROWS_AS(output_deviation(a, LatentSequence(GridShape{1, 2, 2}, 3)), ContractError);
}

TEST_CASE("pruned runs deviate and deviation grows with the prune rate") {
    PipelineConfig cfg;
    cfg.shape = GridShape{4, 2, 2};
    cfg.dim = 8;
    cfg.dff = 16;
    cfg.layers = 6;
    cfg.timesteps = 4;
    cfg.segments = 2;
    cfg.reselect_every = 3;
    cfg.delta = 0.05;

    const auto mean_deviation_at = [&](double rho) {
        double acc = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            PipelineConfig c = cfg;
            c.seed = 500 + seed;
            c.rho = rho;
            if (rho == 0.0) c.delta = 0.0;
            const ExperimentOutput out = run_experiment(c);
            acc += out.report.output_deviation_mse;
        }
        return acc / 10.0;
    };

    const double at00 = mean_deviation_at(0.0);
    const double at02 = mean_deviation_at(0.2);
    const double at04 = mean_deviation_at(0.4);
    CHECK(at00 == 0.0);
    CHECK(at02 > 0.0);
    CHECK(std::isfinite(at04));
    CHECK(at04 >= at02);
    CHECK(at02 >= at00);
}

TEST_CASE("deviation regression value on a pinned run") {
    PipelineConfig cfg;
    cfg.shape = GridShape{4, 2, 2};
    cfg.dim = 8;
    cfg.dff = 16;
    cfg.layers = 6;
    cfg.timesteps = 4;
    cfg.segments = 2;
    cfg.reselect_every = 3;
    cfg.rho = 0.3;
    cfg.delta = 0.1;
    cfg.seed = 1234;
    const ExperimentOutput out = run_experiment(cfg);
    CHECK(out.report.output_deviation_mse > 0.0);
    CHECK(out.report.output_deviation_mse ==
          Catch::Approx(191.06287116161067).epsilon(1e-4));
}
