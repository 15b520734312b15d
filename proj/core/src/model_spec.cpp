#include "nam/model_spec.hpp"

#include "nam/error.hpp"

namespace nam {

std::string_view to_string(BlockKind kind) {
    switch (kind) {
    case BlockKind::plain: return "plain";
    case BlockKind::residual: return "residual";
    }
    throw ConfigError("unknown block kind " + std::to_string(static_cast<int>(kind)));
}

std::string_view to_string(AttentionKind kind) {
    switch (kind) {
    case AttentionKind::none: return "none";
    case AttentionKind::nam_channel: return "nam-ch";
    case AttentionKind::nam_spatial: return "nam-sp";
    case AttentionKind::nam: return "nam";
    case AttentionKind::se: return "se";
    }
    throw ConfigError("unknown attention kind " + std::to_string(static_cast<int>(kind)));
}

AttentionKind parse_attention_kind(std::string_view text) {
    for (auto k : {AttentionKind::none, AttentionKind::nam_channel, AttentionKind::nam_spatial, AttentionKind::nam,
                   AttentionKind::se}) {
        if (to_string(k) == text) return k;
    }
    throw ConfigError("unknown attention type '" + std::string(text) + "' (expected nam-ch, nam-sp, nam, se or none)");
}

std::vector<FeatureDims> resolve_shapes(const ModelSpec& model) {
    std::vector<FeatureDims> dims;
    FeatureDims cur{model.input_channels, model.input_height, model.input_width};
    if (cur.channels == 0 || cur.height == 0 || cur.width == 0) {
        throw ShapeError("model input dimensions must be positive");
    }
    for (std::size_t i = 0; i < model.blocks.size(); ++i) {
        const auto& b = model.blocks[i];
        (void)to_string(b.kind);
        const auto where = "block " + std::to_string(i) + ": ";
        if (b.out_channels == 0 || b.kernel == 0 || b.stride == 0) {
            throw ShapeError(where + "channels, kernel and stride must be positive");
        }
        if (cur.height + 2 * b.padding < b.kernel || cur.width + 2 * b.padding < b.kernel) {
            throw ShapeError(where + "kernel " + std::to_string(b.kernel) + " does not fit input " +
                             std::to_string(cur.height) + "x" + std::to_string(cur.width) + " with padding " +
                             std::to_string(b.padding));
        }
        FeatureDims next{b.out_channels, (cur.height + 2 * b.padding - b.kernel) / b.stride + 1,
                         (cur.width + 2 * b.padding - b.kernel) / b.stride + 1};
        if (b.kind == BlockKind::residual) {
            // The second conv keeps the resolution, so it needs 'same' padding.
            if (b.kernel != 2 * b.padding + 1) {
                throw ShapeError(where + "residual blocks need kernel == 2*padding + 1");
            }
        }
        const auto& a = b.attention;
        if (a.kind != AttentionKind::none) {
            if (a.channels != next.channels || a.height != next.height || a.width != next.width) {
                throw ShapeError(where + "attention sized for " + std::to_string(a.channels) + "x" +
                                 std::to_string(a.height) + "x" + std::to_string(a.width) + " but block outputs " +
                                 std::to_string(next.channels) + "x" + std::to_string(next.height) + "x" +
                                 std::to_string(next.width));
            }
            if (a.kind == AttentionKind::se && (a.reduction == 0 || next.channels % a.reduction != 0)) {
                throw ShapeError(where + "SE reduction " + std::to_string(a.reduction) + " must divide " +
                                 std::to_string(next.channels) + " channels");
            }
        }
        dims.push_back(next);
        cur = next;
    }
    return dims;
}

ModelSpec attach_attention(const ModelSpec& model, AttentionKind kind, std::size_t reduction) {
    (void)to_string(kind);
    ModelSpec out = model;
    for (auto& b : out.blocks) b.attention = AttentionSpec{};
    const auto dims = resolve_shapes(out);
    for (std::size_t i = 0; i < out.blocks.size(); ++i) {
        auto& a = out.blocks[i].attention;
        if (kind == AttentionKind::none) continue;
        a = AttentionSpec{kind, dims[i].channels, dims[i].height, dims[i].width, reduction};
    }
    resolve_shapes(out);
    return out;
}

ModelSpec desk_scale_cnn(AttentionKind attention, std::vector<std::size_t> widths, std::size_t input_channels,
                         std::size_t input_height, std::size_t input_width, std::size_t num_classes) {
    ModelSpec spec;
    spec.input_channels = input_channels;
    spec.input_height = input_height;
    spec.input_width = input_width;
    spec.num_classes = num_classes;
    for (auto w : widths) {
        BlockSpec b;
        b.out_channels = w;
        b.kernel = 3;
        b.stride = 2;
        b.padding = 1;
        spec.blocks.push_back(b);
    }
    return attach_attention(spec, attention, 16);
}

} // namespace nam
