#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "nam/model_spec.hpp"
#include "nam/normalization.hpp"

namespace nam {

/// Channel attention driven by the batch-norm scale: the gate is
/// sigmoid(W_gamma * BN(F)) with W_gamma = |gamma| / sum |gamma|.
struct NamChannelAttention {
    explicit NamChannelAttention(std::size_t channels, std::string name = "nam.channel")
        : bn(channels, std::move(name) + ".bn") {}

    BatchNormChannel bn;
};

/// Spatial attention driven by the pixel-normalization scale lambda.
struct NamSpatialAttention {
    NamSpatialAttention(std::size_t height, std::size_t width, std::string name = "nam.spatial")
        : pn(height, width, std::move(name) + ".pn") {}

    PixelNorm pn;
};

enum class NamMode { channel_only, spatial_only, channel_then_spatial };

enum class Placement { end_of_block };

struct NamBlockConfig {
    NamMode mode = NamMode::channel_then_spatial;
    Placement placement = Placement::end_of_block;
};

std::string_view to_string(NamMode mode);
NamMode parse_nam_mode(std::string_view text);
AttentionKind attention_kind(NamMode mode);

/// Gate values in (0,1), same shape as the input.
Var channel_attention_gate(ForwardContext& ctx, Var f1, NamChannelAttention& att);
Var spatial_attention_gate(ForwardContext& ctx, Var f2, NamSpatialAttention& att);

/// Input multiplied by its gate.
Var channel_attention_forward(ForwardContext& ctx, Var f1, NamChannelAttention& att);
Var spatial_attention_forward(ForwardContext& ctx, Var f2, NamSpatialAttention& att);

/// Dispatches on cfg.mode; channel-then-spatial feeds the channel output to
/// the spatial submodule. Only the submodules the mode uses are touched.
Var nam_forward(ForwardContext& ctx, Var x, const NamBlockConfig& cfg, NamChannelAttention* ch,
                NamSpatialAttention* sp);

/// A NAM insertion with its own submodules, sized from the block it follows.
struct NamModule {
    NamModule(const NamBlockConfig& cfg, std::size_t channels, std::size_t height, std::size_t width,
              const std::string& name);

    Var forward(ForwardContext& ctx, Var x);

    NamBlockConfig config;
    std::optional<NamChannelAttention> channel;
    std::optional<NamSpatialAttention> spatial;
};

/// One NAM instance after every block, placed after the residual addition
/// for residual blocks and sized by that block's output channels and
/// resolution.
ModelSpec attach_nam(const ModelSpec& model, const NamBlockConfig& cfg);

} // namespace nam
