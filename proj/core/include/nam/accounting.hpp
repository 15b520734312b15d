#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nam/model_spec.hpp"

namespace nam {

using Count = std::uint64_t;

/// Per-block dimensions: the block carries base_channels * expansion output
/// channels at height x width.
struct BlockDims {
    std::size_t base_channels = 1;
    std::size_t expansion = 1;
    std::size_t height = 1;
    std::size_t width = 1;

    std::size_t channels() const noexcept { return base_channels * expansion; }
};

/// ResNet50 stages at 32x32 input: (512,4,32,32) (256,4,16,16) (128,4,8,8) (64,4,4,4).
std::vector<BlockDims> resnet50_block_dims();

/// Shared two-layer MLP of a CBAM channel submodule: C*R*C*R/r*2.
Count cbam_channel_params(const BlockDims& d, std::size_t reduction);
/// One gamma per channel: C*R.
Count nam_channel_params(const BlockDims& d);
/// 2-to-1 k x k conv: 2*k*k. Rejects even k.
Count cbam_spatial_params(std::size_t kernel);
/// One lambda per position: H*W.
Count nam_spatial_params(const BlockDims& d);
/// Two bias-free weight matrices: 2*C*C/r.
Count se_params(std::size_t channels, std::size_t reduction);

enum class CountAttention { cbam_channel, cbam_spatial, cbam, nam_channel, nam_spatial, nam, se };

std::string_view to_string(CountAttention kind);
/// cbam-channel, cbam-spatial, cbam, nam-channel (or nam-ch), nam-spatial
/// (or nam-sp), nam, se.
CountAttention parse_count_attention(std::string_view text);

struct CountOptions {
    std::size_t reduction = 16;
    std::size_t kernel = 7;
};

/// `params` counts attention weights only (scales only for NAM, MLP or conv
/// weights only for CBAM/SE); `trainable` counts every trainable value of the
/// constructed module (gamma and beta for NAM). FLOPs count one fused
/// multiply-add as 1, at batch size 1.
struct CountRow {
    std::string block;
    std::string type;
    Count params = 0;
    Count flops = 0;
    Count trainable = 0;

    friend bool operator==(const CountRow&, const CountRow&) = default;
};

struct CountReport {
    CountAttention attention;
    std::vector<CountRow> rows;
    Count total_params = 0;
    Count total_flops = 0;
    Count total_trainable = 0;
};

inline constexpr std::string_view flop_convention = "one fused multiply-add = 1 FLOP";

/// Tabulates the closed-form counts per block. Where a module exists in this
/// library (NAM submodules, the SE/CBAM MLP) it is constructed and its
/// parameters enumerated; a disagreement with the formula throws.
CountReport count_report(std::span<const BlockDims> blocks, CountAttention attention,
                         const CountOptions& options = {});

/// Columns: block,type,params,flops,trainable; a leading '#' line states the
/// FLOP convention and the last row holds the totals.
std::string to_csv(const CountReport& report);
std::string to_json(const CountReport& report);

/// Multiply-accumulate count of a model. input_dims is [N,C,H,W], or [N,D]
/// for a model with no blocks. conv: N*F*C*kh*kw*H'*W'; dense: N*D*K;
/// normalization, activations, pooling and other elementwise ops: one per
/// output element.
Count flops_estimate(const ModelSpec& model, std::span<const std::size_t> input_dims);

/// FLOPs of one attention module on an N x C x H x W feature map.
Count attention_flops(AttentionKind kind, std::size_t n, std::size_t channels, std::size_t height, std::size_t width,
                      std::size_t reduction);

} // namespace nam
