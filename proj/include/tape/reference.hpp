// SPDX-License-Identifier: Apache-2.0
#pragma once

// Deliberately naive double-precision recomputation of the attention layer,
// kept structurally independent of the production kernels so the two can
// cross-check each other. Quadratic space, full N x N matrices, no gathering.

#include <cmath>
#include <cstddef>
#include <vector>

#include "tape/attention.hpp"
#include "tape/errors.hpp"
#include "tape/grid.hpp"

namespace tape::reference {

struct DenseAttentionResult {
    std::vector<double> updated;              // N x d
    std::vector<double> received_importance;  // N
};

inline DenseAttentionResult dense_attention(const LatentSequence& seq, const LayerWeights& w,
                                            const KeepMask& mask) {
    if (seq.shape != mask.shape) throw ContractError("sequence and mask shapes differ");
    const std::size_t n = seq.shape.total_tokens();
    const auto d = static_cast<std::size_t>(w.dim);
    const auto heads = static_cast<std::size_t>(w.heads);
    const std::size_t dh = d / heads;

    auto project = [&](const std::vector<float>& weight) {
        std::vector<double> out(n * d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (!mask.is_kept(i)) continue;
            for (std::size_t j = 0; j < d; ++j) {
                double acc = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    acc += static_cast<double>(seq.row(i)[c]) *
                           static_cast<double>(weight[c * d + j]);
                }
                out[i * d + j] = acc;
            }
        }
        return out;
    };

    const std::vector<double> q = project(w.w_q);
    const std::vector<double> k = project(w.w_k);
    const std::vector<double> v = project(w.w_v);

    std::size_t n_active = 0;
    for (std::size_t i = 0; i < n; ++i) n_active += mask.is_kept(i) ? 1 : 0;

    std::vector<double> context(n * d, 0.0);
    std::vector<double> received(n, 0.0);
    std::vector<double> weights(n);

    for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!mask.is_kept(i)) continue;
            double row_max = -1e300;
            for (std::size_t j = 0; j < n; ++j) {
                if (!mask.is_kept(j)) continue;
                double dot = 0.0;
                for (std::size_t c = 0; c < dh; ++c) {
                    dot += q[i * d + h * dh + c] * k[j * d + h * dh + c];
                }
                weights[j] = dot / std::sqrt(static_cast<double>(dh));
                row_max = std::max(row_max, weights[j]);
            }
            double denom = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (!mask.is_kept(j)) continue;
                weights[j] = std::exp(weights[j] - row_max);
                denom += weights[j];
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (!mask.is_kept(j)) continue;
                const double a = weights[j] / denom;
                if (j != i) received[j] += a;
                for (std::size_t c = 0; c < dh; ++c) {
                    context[i * d + h * dh + c] += a * v[j * d + h * dh + c];
                }
            }
        }
    }

    DenseAttentionResult result;
    result.updated.assign(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double acc = 0.0;
            if (mask.is_kept(i)) {
                for (std::size_t c = 0; c < d; ++c) {
                    acc += context[i * d + c] * static_cast<double>(w.w_o[c * d + j]);
                }
            }
            result.updated[i * d + j] = static_cast<double>(seq.row(i)[j]) + acc;
        }
    }

    result.received_importance.assign(n, 0.0);
    if (n_active > 1) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!mask.is_kept(i)) continue;
            result.received_importance[i] =
                received[i] / (static_cast<double>(heads) * static_cast<double>(n_active - 1));
        }
    }
    return result;
}

// Largest elementwise deviation of the production output from the dense
// recomputation, relative to the dense result's magnitude.
inline double relative_error(const AttentionOutput& out, const DenseAttentionResult& ref) {
    double max_abs = 0.0, max_diff = 0.0;
    for (std::size_t i = 0; i < ref.updated.size(); ++i) {
        max_abs = std::max(max_abs, std::abs(ref.updated[i]));
        max_diff = std::max(max_diff,
                            std::abs(static_cast<double>(out.updated.features[i]) - ref.updated[i]));
    }
    for (std::size_t i = 0; i < ref.received_importance.size(); ++i) {
        max_abs = std::max(max_abs, std::abs(ref.received_importance[i]));
        max_diff = std::max(max_diff, std::abs(out.received_importance.values[i] -
                                               ref.received_importance[i]));
    }
    return max_abs > 0.0 ? max_diff / max_abs : max_diff;
}

}  // namespace tape::reference
