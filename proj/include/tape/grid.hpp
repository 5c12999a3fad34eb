// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tape/errors.hpp"

namespace tape {

using TokenIndex = std::size_t;

// The (frames x height x width) token lattice of a latent video clip.
// Linearization is frame-major so that per-frame slices are contiguous.
struct GridShape {
    int frames = 1;
    int height = 1;
    int width = 1;

    std::size_t tokens_per_frame() const {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    }
    std::size_t total_tokens() const {
        return static_cast<std::size_t>(frames) * tokens_per_frame();
    }

    void validate() const {
        if (frames < 1 || height < 1 || width < 1) {
            throw ConfigError("grid dimensions must be >= 1, got frames=" +
                              std::to_string(frames) + " height=" + std::to_string(height) +
                              " width=" + std::to_string(width));
        }
    }

    bool operator==(const GridShape&) const = default;
};

struct TokenCoords {
    int frame = 0;
    int row = 0;
    int col = 0;
    bool operator==(const TokenCoords&) const = default;
};

inline TokenIndex flatten_index(int frame, int row, int col, const GridShape& shape) {
    if (frame < 0 || frame >= shape.frames || row < 0 || row >= shape.height ||
        col < 0 || col >= shape.width) {
        throw RangeError("token coordinate (" + std::to_string(frame) + "," +
                         std::to_string(row) + "," + std::to_string(col) +
                         ") outside grid");
    }
    return (static_cast<std::size_t>(frame) * shape.height + row) * shape.width + col;
}

inline TokenCoords unflatten_index(TokenIndex index, const GridShape& shape) {
    if (index >= shape.total_tokens()) {
        throw RangeError("token index " + std::to_string(index) + " outside grid of " +
                         std::to_string(shape.total_tokens()) + " tokens");
    }
    const std::size_t per_frame = shape.tokens_per_frame();
    TokenCoords c;
    c.frame = static_cast<int>(index / per_frame);
    const std::size_t rem = index % per_frame;
    c.row = static_cast<int>(rem / shape.width);
    c.col = static_cast<int>(rem % shape.width);
    return c;
}

inline int frame_of(TokenIndex index, const GridShape& shape) {
    if (index >= shape.total_tokens()) {
        throw RangeError("token index " + std::to_string(index) + " outside grid of " +
                         std::to_string(shape.total_tokens()) + " tokens");
    }
    return static_cast<int>(index / shape.tokens_per_frame());
}

// One real-valued score per token, frame-addressable.
struct ScoreField {
    GridShape shape;
    std::vector<double> values;

    ScoreField() = default;
    explicit ScoreField(const GridShape& s) : shape(s), values(s.total_tokens(), 0.0) {}

    double& at(TokenIndex i) { return values[i]; }
    double at(TokenIndex i) const { return values[i]; }
    double at(int frame, int row, int col) const {
        return values[flatten_index(frame, row, col, shape)];
    }

    bool all_finite() const {
        for (double v : values) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

// Per-token activity: kept tokens participate in layer computation, skipped
// tokens pass through untouched but keep their position.
struct KeepMask {
    GridShape shape;
    std::vector<std::uint8_t> kept;

    KeepMask() = default;
    explicit KeepMask(const GridShape& s, bool keep_all = true)
        : shape(s), kept(s.total_tokens(), keep_all ? 1 : 0) {}

    static KeepMask all_kept(const GridShape& s) { return KeepMask(s, true); }

    bool is_kept(TokenIndex i) const { return kept[i] != 0; }
    void set(TokenIndex i, bool v) { kept[i] = v ? 1 : 0; }

    std::size_t kept_count() const {
        std::size_t n = 0;
        for (auto k : kept) n += k;
        return n;
    }

    std::size_t frame_kept_count(int frame) const {
        const std::size_t per_frame = shape.tokens_per_frame();
        const std::size_t base = static_cast<std::size_t>(frame) * per_frame;
        std::size_t n = 0;
        for (std::size_t p = 0; p < per_frame; ++p) n += kept[base + p];
        return n;
    }

    bool operator==(const KeepMask&) const = default;
};

}  // namespace tape
