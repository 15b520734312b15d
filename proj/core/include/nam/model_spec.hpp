#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace nam {

enum class BlockKind { plain, residual };
enum class Activation { none, relu };
enum class AttentionKind { none, nam_channel, nam_spatial, nam, se };

std::string_view to_string(BlockKind kind);
std::string_view to_string(AttentionKind kind);

/// Accepts the CLI names: none, nam-ch, nam-sp, nam, se.
AttentionKind parse_attention_kind(std::string_view text);

/// Attention attached at the end of a block, with the feature dimensions it
/// was sized for.
struct AttentionSpec {
    AttentionKind kind = AttentionKind::none;
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t reduction = 16;

    friend bool operator==(const AttentionSpec&, const AttentionSpec&) = default;
};

/// plain:    conv -> [bn] -> [act]
/// residual: conv -> bn -> relu -> conv(stride 1) -> bn, plus a skip path
///           (identity, or 1x1 conv + bn when the shape changes), add, [act]
/// Attention, when present, follows everything above.
struct BlockSpec {
    BlockKind kind = BlockKind::plain;
    std::size_t out_channels = 0;
    std::size_t kernel = 3;
    std::size_t stride = 1;
    std::size_t padding = 1;
    bool batch_norm = true;
    Activation activation = Activation::relu;
    AttentionSpec attention;

    friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

/// Blocks followed by global average pooling and a dense classifier. With
/// num_classes == 0 the model ends after the last block.
struct ModelSpec {
    std::size_t input_channels = 1;
    std::size_t input_height = 28;
    std::size_t input_width = 28;
    std::vector<BlockSpec> blocks;
    std::size_t num_classes = 10;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct FeatureDims {
    std::size_t channels;
    std::size_t height;
    std::size_t width;

    friend bool operator==(const FeatureDims&, const FeatureDims&) = default;
};

/// Output dimensions of every block; throws ShapeError when a block cannot be
/// applied to its input.
std::vector<FeatureDims> resolve_shapes(const ModelSpec& model);

/// Sets the attention of every block, sized from the resolved shapes.
ModelSpec attach_attention(const ModelSpec& model, AttentionKind kind, std::size_t reduction = 16);

/// Four plain 3x3 blocks with stride 2, widths 16/32/64/128 by default.
ModelSpec desk_scale_cnn(AttentionKind attention, std::vector<std::size_t> widths = {16, 32, 64, 128},
                         std::size_t input_channels = 1, std::size_t input_height = 28,
                         std::size_t input_width = 28, std::size_t num_classes = 10);

} // namespace nam
