#pragma once

#include <cstddef>
#include <random>
#include <string>

#include "nam/module.hpp"

namespace nam {

/// Squeeze-and-excitation channel attention: global average pool, a
/// two-layer bias-free MLP with a C/r bottleneck, and a sigmoid gate.
struct SeChannelAttention {
    SeChannelAttention(std::size_t channels, std::size_t reduction = 16, std::string name = "se");

    std::size_t channels() const noexcept { return w1.value.dim(0); }
    std::size_t hidden() const noexcept { return w1.value.dim(1); }

    /// He-normal initialization of both weight matrices.
    void initialize(std::mt19937_64& rng);

    Parameter w1; // [C, C/r]
    Parameter w2; // [C/r, C]
    std::size_t reduction;
};

Var se_gate(ForwardContext& ctx, Var x, SeChannelAttention& att);
Var se_forward(ForwardContext& ctx, Var x, SeChannelAttention& att);

} // namespace nam
