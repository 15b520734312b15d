#include "nam/attention.hpp"

#include "nam/error.hpp"
#include "nam/ops.hpp"

namespace nam {

std::string_view to_string(NamMode mode) {
    switch (mode) {
    case NamMode::channel_only: return "channel";
    case NamMode::spatial_only: return "spatial";
    case NamMode::channel_then_spatial: return "channel-spatial";
    }
    throw ConfigError("unknown NAM mode");
}

NamMode parse_nam_mode(std::string_view text) {
    for (auto m : {NamMode::channel_only, NamMode::spatial_only, NamMode::channel_then_spatial}) {
        if (to_string(m) == text) return m;
    }
    throw ConfigError("unknown NAM mode '" + std::string(text) + "'");
}

AttentionKind attention_kind(NamMode mode) {
    switch (mode) {
    case NamMode::channel_only: return AttentionKind::nam_channel;
    case NamMode::spatial_only: return AttentionKind::nam_spatial;
    case NamMode::channel_then_spatial: return AttentionKind::nam;
    }
    throw ConfigError("unknown NAM mode");
}

Var channel_attention_gate(ForwardContext& ctx, Var f1, NamChannelAttention& att) {
    Var normalized = batch_norm_forward(ctx, f1, att.bn);
    Var weights = normalized_weights(ctx.bind(att.bn.gamma));
    return sigmoid(scale_channels(normalized, weights));
}

Var spatial_attention_gate(ForwardContext& ctx, Var f2, NamSpatialAttention& att) {
    Var normalized = pixel_norm_forward(ctx, f2, att.pn);
    Var weights = normalized_weights(ctx.bind(att.pn.lambda));
    return sigmoid(scale_positions(normalized, weights));
}

Var channel_attention_forward(ForwardContext& ctx, Var f1, NamChannelAttention& att) {
    return mul(f1, channel_attention_gate(ctx, f1, att));
}

Var spatial_attention_forward(ForwardContext& ctx, Var f2, NamSpatialAttention& att) {
    return mul(f2, spatial_attention_gate(ctx, f2, att));
}

Var nam_forward(ForwardContext& ctx, Var x, const NamBlockConfig& cfg, NamChannelAttention* ch,
                NamSpatialAttention* sp) {
    const bool use_channel = cfg.mode != NamMode::spatial_only;
    const bool use_spatial = cfg.mode != NamMode::channel_only;
    if (use_channel && ch == nullptr) throw ConfigError("nam_forward: mode needs a channel submodule");
    if (use_spatial && sp == nullptr) throw ConfigError("nam_forward: mode needs a spatial submodule");
    Var out = x;
    if (use_channel) out = channel_attention_forward(ctx, out, *ch);
    if (use_spatial) out = spatial_attention_forward(ctx, out, *sp);
    return out;
}

NamModule::NamModule(const NamBlockConfig& cfg, std::size_t channels, std::size_t height, std::size_t width,
                     const std::string& name)
    : config(cfg) {
    if (cfg.mode != NamMode::spatial_only) channel.emplace(channels, name + ".channel");
    if (cfg.mode != NamMode::channel_only) spatial.emplace(height, width, name + ".spatial");
}

Var NamModule::forward(ForwardContext& ctx, Var x) {
    return nam_forward(ctx, x, config, channel ? &*channel : nullptr, spatial ? &*spatial : nullptr);
}

ModelSpec attach_nam(const ModelSpec& model, const NamBlockConfig& cfg) {
    if (cfg.placement != Placement::end_of_block) throw ConfigError("attach_nam: unsupported placement");
    for (std::size_t i = 0; i < model.blocks.size(); ++i) {
        const auto kind = model.blocks[i].kind;
        if (kind != BlockKind::plain && kind != BlockKind::residual) {
            throw ConfigError("attach_nam: block " + std::to_string(i) + " has unknown type " +
                              std::to_string(static_cast<int>(kind)) + " with no end-of-block insertion point");
        }
    }
    return attach_attention(model, attention_kind(cfg.mode));
}

} // namespace nam
