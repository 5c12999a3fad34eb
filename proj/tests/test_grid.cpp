// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "tape/grid.hpp"
#include "tape/rng.hpp"

using namespace tape;

TEST_CASE("flatten_index is frame-major") {
    const GridShape shape{2, 2, 2};
    CHECK(flatten_index(0, 0, 0, shape) == 0);
    CHECK(flatten_index(1, 0, 0, shape) == 4);  // frame stride H*W = 4
    CHECK(flatten_index(1, 1, 1, shape) == 7);
}

TEST_CASE("flatten_index rejects out-of-range coordinates") {
    const GridShape shape{2, 2, 2};
    CHECK_THROWS_AS(flatten_index(2, 0, 0, shape), RangeError);
    CHECK_THROWS_AS(flatten_index(0, 2, 0, shape), RangeError);
    CHECK_THROWS_AS(flatten_index(0, 0, 2, shape), RangeError);
    CHECK_THROWS_AS(flatten_index(-1, 0, 0, shape), RangeError);
}

TEST_CASE("frame_of recovers the frame") {
    const GridShape shape{2, 2, 2};
    CHECK(frame_of(0, shape) == 0);
    CHECK(frame_of(4, shape) == 1);
    CHECK(frame_of(7, shape) == 1);
    CHECK_THROWS_AS(frame_of(8, shape), RangeError);
}

TEST_CASE("flatten/unflatten round-trips over random shapes") {
    for (int trial = 0; trial < 50; ++trial) {
        const auto pick = [&](std::uint64_t salt) {
            return 1 + static_cast<int>(rng::counter_hash(99, salt, trial) % 8);
        };
        const GridShape shape{pick(1), pick(2), pick(3)};
        for (TokenIndex i = 0; i < shape.total_tokens(); ++i) {
            const TokenCoords c = unflatten_index(i, shape);
            CHECK(flatten_index(c.frame, c.row, c.col, shape) == i);
            CHECK(frame_of(i, shape) == c.frame);
        }
    }
}

TEST_CASE("grid shape validation") {
    CHECK_THROWS_AS(GridShape({0, 1, 1}).validate(), ConfigError);
    CHECK_THROWS_AS(GridShape({1, 0, 1}).validate(), ConfigError);
    CHECK_NOTHROW(GridShape({1, 1, 1}).validate());
    CHECK(GridShape({3, 4, 5}).total_tokens() == 60);
}

TEST_CASE("keep mask counts per frame") {
    const GridShape shape{2, 1, 3};
    KeepMask mask(shape, false);
    mask.set(0, true);
    mask.set(4, true);
    mask.set(5, true);
    CHECK(mask.kept_count() == 3);
    CHECK(mask.frame_kept_count(0) == 1);
    CHECK(mask.frame_kept_count(1) == 2);
}
