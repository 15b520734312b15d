#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "nam/tape.hpp"

namespace nam {

struct Conv2dOptions {
    std::size_t stride = 1;
    std::size_t padding = 0;
};

/// Cross-correlation of input [N,C,H,W] with kernel [F,C,kh,kw]; optional
/// bias [F]. Output is [N,F,H',W'] with H' = (H + 2p - kh)/stride + 1.
Var conv2d(Var input, Var kernel, std::optional<Var> bias, Conv2dOptions options = {});

/// x [N,D] times weight [D,K], plus bias [K] broadcast over rows.
Var dense(Var x, Var weight, std::optional<Var> bias);

Var sigmoid(Var x);
Var relu(Var x);
Var absolute(Var x);

/// [N,C,H,W] -> [N,C] spatial mean.
Var global_avg_pool(Var x);

/// Mean softmax cross-entropy over the batch. Labels must lie in [0,K).
Var softmax_cross_entropy(Var logits, std::span<const int> labels);

/// Sum of all elements, as a scalar.
Var sum(Var x);
/// Sum of x * weights over all elements; weights is a constant of x's shape.
Var weighted_sum(Var x, const Tensor& weights);

Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double factor);

/// x [N,C,H,W] times w [C] broadcast over N,H,W.
Var scale_channels(Var x, Var w);
/// x [N,C,H,W] times w [H*W] broadcast over N,C.
Var scale_positions(Var x, Var w);
/// x [N,C,H,W] times g [N,C] broadcast over H,W.
Var gate_channels(Var x, Var g);

// Plain-tensor kernels shared with tests and benchmarks.
namespace kernels {

double sigmoid(double x) noexcept;

} // namespace kernels

} // namespace nam
