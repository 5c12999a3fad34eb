// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tape/errors.hpp"
#include "tape/grid.hpp"
#include "tape/rng.hpp"

namespace tape {

// Per-layer parameters of one transformer block. All matrices are row-major.
struct LayerWeights {
    int dim = 0;
    int dff = 0;
    int heads = 1;
    std::vector<float> w_q, w_k, w_v, w_o;  // dim x dim
    std::vector<float> mlp_in;              // dim x dff
    std::vector<float> mlp_out;             // dff x dim
};

// Token representations for one grid, row i = TokenIndex i.
struct LatentSequence {
    GridShape shape;
    int dim = 0;
    std::vector<float> features;  // total_tokens x dim, row-major

    LatentSequence() = default;
    LatentSequence(const GridShape& s, int d)
        : shape(s), dim(d), features(s.total_tokens() * static_cast<std::size_t>(d), 0.0f) {}

    float* row(TokenIndex i) { return features.data() + i * static_cast<std::size_t>(dim); }
    const float* row(TokenIndex i) const {
        return features.data() + i * static_cast<std::size_t>(dim);
    }
};

struct AttentionOutput {
    LatentSequence updated;
    ScoreField received_importance;
};

// Counts scalar multiplications executed by the forward kernels. The no-op
// variant compiles away; the counting variant is the measurement side of the
// cost-model cross-check, so it ticks once per actual multiply.
struct NoopMulCounter {
    void tick() {}
};

struct MulCounter {
    std::uint64_t mults = 0;
    void tick() { ++mults; }
};

namespace detail {

// Matrix ids inside a layer's weight stream.
enum : std::uint64_t { kWq = 0, kWk, kWv, kWo, kMlpIn, kMlpOut };

inline std::vector<float> random_matrix(std::uint64_t seed, std::uint64_t stream,
                                        std::size_t rows, std::size_t cols, double scale) {
    std::vector<float> m(rows * cols);
    for (std::size_t i = 0; i < m.size(); ++i) {
        m[i] = static_cast<float>(rng::normal_at(seed, stream, i) * scale);
    }
    return m;
}

// out[i][:] = sum_k a[i][k] * b[k][:], a: n x inner, b: inner x cols.
template <class Counter>
void matmul(const float* a, const float* b, float* out, std::size_t n, std::size_t inner,
            std::size_t cols, Counter& mc) {
    for (std::size_t i = 0; i < n; ++i) {
        float* dst = out + i * cols;
        for (std::size_t j = 0; j < cols; ++j) dst[j] = 0.0f;
        const float* arow = a + i * inner;
        for (std::size_t k = 0; k < inner; ++k) {
            const float aik = arow[k];
            const float* brow = b + k * cols;
            for (std::size_t j = 0; j < cols; ++j) {
                dst[j] += aik * brow[j];
                mc.tick();
            }
        }
    }
}

}  // namespace detail

// Deterministic weight construction: every entry is a pure function of
// (seed, layer, matrix, flat index), drawn N(0, 1/dim).
inline std::vector<LayerWeights> init_weights(std::uint64_t seed, int layers, int dim,
                                              int dff, int heads) {
    if (layers < 1) throw ConfigError("layers must be >= 1, got " + std::to_string(layers));
    if (dim < 1 || dff < 1) throw ConfigError("dim and dff must be >= 1");
    if (heads < 1 || dim % heads != 0) {
        throw ConfigError("dim must be divisible by heads, got dim=" + std::to_string(dim) +
                          " heads=" + std::to_string(heads));
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    std::vector<LayerWeights> all(static_cast<std::size_t>(layers));
    for (int l = 0; l < layers; ++l) {
        auto stream = [&](std::uint64_t matrix) {
            return rng::kStreamWeights + static_cast<std::uint64_t>(l) * 8 + matrix;
        };
        LayerWeights& w = all[static_cast<std::size_t>(l)];
        w.dim = dim;
        w.dff = dff;
        w.heads = heads;
        const auto d = static_cast<std::size_t>(dim);
        const auto f = static_cast<std::size_t>(dff);
        w.w_q = detail::random_matrix(seed, stream(detail::kWq), d, d, scale);
        w.w_k = detail::random_matrix(seed, stream(detail::kWk), d, d, scale);
        w.w_v = detail::random_matrix(seed, stream(detail::kWv), d, d, scale);
        w.w_o = detail::random_matrix(seed, stream(detail::kWo), d, d, scale);
        w.mlp_in = detail::random_matrix(seed, stream(detail::kMlpIn), d, f, scale);
        w.mlp_out = detail::random_matrix(seed, stream(detail::kMlpOut), f, d, scale);
    }
    return all;
}

// Synthetic clip latents: frame 0 is white noise, frame n follows an AR(1)
// chain frame[n] = gamma*frame[n-1] + sqrt(1-gamma^2)*noise, per token and
// channel, which gives adjacent frames a feature correlation of gamma.
inline LatentSequence synth_latents(std::uint64_t seed, const GridShape& shape, int dim,
                                    double gamma) {
    shape.validate();
    if (dim < 1) throw ConfigError("dim must be >= 1");
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw ConfigError("gamma must be in [0, 1], got " + std::to_string(gamma));
    }
    LatentSequence seq(shape, dim);
    const std::size_t per_frame = shape.tokens_per_frame();
    const auto d = static_cast<std::size_t>(dim);
    const float g = static_cast<float>(gamma);
    const float fresh = static_cast<float>(std::sqrt(1.0 - gamma * gamma));
    for (int n = 0; n < shape.frames; ++n) {
        const std::size_t frame_base = static_cast<std::size_t>(n) * per_frame * d;
        for (std::size_t p = 0; p < per_frame; ++p) {
            float* dst = seq.features.data() + frame_base + p * d;
            const float* prev = dst - per_frame * d;
            for (std::size_t c = 0; c < d; ++c) {
                const std::uint64_t idx =
                    (static_cast<std::uint64_t>(n) * per_frame + p) * d + c;
                const auto z = static_cast<float>(rng::normal_at(seed, rng::kStreamLatents, idx));
                dst[c] = (n == 0) ? z : g * prev[c] + fresh * z;
            }
        }
    }
    return seq;
}

// Masked multi-head self-attention over the full spatiotemporal sequence.
// Kept tokens act as queries, keys and values; skipped tokens are excluded
// from all three roles and their rows pass through bit-identical.
// received_importance[i] is the mean over heads of the attention token i
// receives from the other active tokens, normalized by (N_active - 1);
// it is 0 for skipped tokens and when only one token is active.
template <class Counter>
AttentionOutput attention_forward_counted(const LatentSequence& seq, const LayerWeights& w,
                                          const KeepMask& mask, Counter& mc) {
    if (seq.shape != mask.shape) throw ContractError("sequence and mask shapes differ");
    if (seq.dim != w.dim) throw ContractError("sequence dim does not match weights");

    std::vector<std::size_t> active;
    active.reserve(seq.shape.total_tokens());
    for (std::size_t i = 0; i < mask.kept.size(); ++i) {
        if (mask.kept[i]) active.push_back(i);
    }
    for (int f = 0; f < seq.shape.frames; ++f) {
        if (mask.frame_kept_count(f) == 0) {
            throw ContractError("frame " + std::to_string(f) + " has no active tokens");
        }
    }

    const std::size_t na = active.size();
    const auto d = static_cast<std::size_t>(w.dim);
    const auto heads = static_cast<std::size_t>(w.heads);
    const std::size_t dh = d / heads;

    std::vector<float> x(na * d);
    for (std::size_t i = 0; i < na; ++i) {
        const float* src = seq.row(active[i]);
        std::copy(src, src + d, x.begin() + i * d);
    }

    std::vector<float> q(na * d), k(na * d), v(na * d);
    detail::matmul(x.data(), w.w_q.data(), q.data(), na, d, d, mc);
    detail::matmul(x.data(), w.w_k.data(), k.data(), na, d, d, mc);
    detail::matmul(x.data(), w.w_v.data(), v.data(), na, d, d, mc);

    const float inv_sqrt_dh = 1.0f / std::sqrt(static_cast<float>(dh));
    std::vector<float> attn_row(na);
    std::vector<float> k_t(na * dh);  // transposed keys for one head
    std::vector<float> context(na * d, 0.0f);
    std::vector<double> received(na, 0.0);

    for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t off = h * dh;
        for (std::size_t c = 0; c < dh; ++c) {
            float* dst = k_t.data() + c * na;
            for (std::size_t j = 0; j < na; ++j) dst[j] = k[j * d + off + c];
        }
        for (std::size_t i = 0; i < na; ++i) {
            const float* qi = q.data() + i * d + off;
            for (std::size_t j = 0; j < na; ++j) attn_row[j] = 0.0f;
            for (std::size_t c = 0; c < dh; ++c) {
                const float qc = qi[c];
                const float* krow = k_t.data() + c * na;
                for (std::size_t j = 0; j < na; ++j) {
                    attn_row[j] += qc * krow[j];
                    mc.tick();
                }
            }
            float row_max = -std::numeric_limits<float>::infinity();
            for (std::size_t j = 0; j < na; ++j) {
                attn_row[j] *= inv_sqrt_dh;
                row_max = std::max(row_max, attn_row[j]);
            }
            double denom = 0.0;
            for (std::size_t j = 0; j < na; ++j) {
                attn_row[j] = std::exp(attn_row[j] - row_max);
                denom += attn_row[j];
            }
            const auto inv_denom = static_cast<float>(1.0 / denom);
            float* ctx = context.data() + i * d + off;
            for (std::size_t j = 0; j < na; ++j) {
                const float a = attn_row[j] * inv_denom;
                if (j != i) received[j] += a;
                const float* vj = v.data() + j * d + off;
                for (std::size_t c = 0; c < dh; ++c) {
                    ctx[c] += a * vj[c];
                    mc.tick();
                }
            }
        }
    }

    std::vector<float> projected(na * d);
    detail::matmul(context.data(), w.w_o.data(), projected.data(), na, d, d, mc);

    AttentionOutput out;
    out.updated = seq;
    for (std::size_t i = 0; i < na; ++i) {
        float* dst = out.updated.row(active[i]);
        const float* add = projected.data() + i * d;
        for (std::size_t c = 0; c < d; ++c) dst[c] += add[c];
    }

    out.received_importance = ScoreField(seq.shape);
    if (na > 1) {
        const double norm = 1.0 / (static_cast<double>(heads) * static_cast<double>(na - 1));
        for (std::size_t i = 0; i < na; ++i) {
            out.received_importance.values[active[i]] = received[i] * norm;
        }
    }
    return out;
}

inline AttentionOutput attention_forward(const LatentSequence& seq, const LayerWeights& w,
                                         const KeepMask& mask) {
    NoopMulCounter mc;
    return attention_forward_counted(seq, w, mask, mc);
}

// Two-layer MLP with ReLU and residual, applied to kept rows only.
template <class Counter>
LatentSequence mlp_forward_counted(const LatentSequence& seq, const LayerWeights& w,
                                   const KeepMask& mask, Counter& mc) {
    if (seq.shape != mask.shape) throw ContractError("sequence and mask shapes differ");
    if (seq.dim != w.dim) throw ContractError("sequence dim does not match weights");

    const auto d = static_cast<std::size_t>(w.dim);
    const auto f = static_cast<std::size_t>(w.dff);
    LatentSequence out = seq;
    std::vector<float> hidden(f);
    for (std::size_t i = 0; i < mask.kept.size(); ++i) {
        if (!mask.kept[i]) continue;
        const float* xrow = seq.row(i);
        for (std::size_t j = 0; j < f; ++j) hidden[j] = 0.0f;
        for (std::size_t c = 0; c < d; ++c) {
            const float xc = xrow[c];
            const float* wrow = w.mlp_in.data() + c * f;
            for (std::size_t j = 0; j < f; ++j) {
                hidden[j] += xc * wrow[j];
                mc.tick();
            }
        }
        for (std::size_t j = 0; j < f; ++j) hidden[j] = std::max(hidden[j], 0.0f);
        float* dst = out.row(i);
        for (std::size_t j = 0; j < f; ++j) {
            const float hj = hidden[j];
            const float* wrow = w.mlp_out.data() + j * d;
            for (std::size_t c = 0; c < d; ++c) {
                dst[c] += hj * wrow[c];
                mc.tick();
            }
        }
    }
    return out;
}

inline LatentSequence mlp_forward(const LatentSequence& seq, const LayerWeights& w,
                                  const KeepMask& mask) {
    NoopMulCounter mc;
    return mlp_forward_counted(seq, w, mask, mc);
}

}  // namespace tape
