#include "nam/accounting.hpp"

#include "json.hpp"

#include <sstream>

#include "nam/attention.hpp"
#include "nam/baselines.hpp"
#include "nam/error.hpp"

namespace nam {
namespace {

void require_divides(std::size_t channels, std::size_t reduction) {
    if (reduction == 0 || channels % reduction != 0) {
        throw ConfigError("reduction " + std::to_string(reduction) + " does not divide " + std::to_string(channels) +
                          " channels");
    }
}

void require_positive(const BlockDims& d) {
    if (d.base_channels == 0 || d.expansion == 0 || d.height == 0 || d.width == 0) {
        throw ConfigError("block dimensions must be positive");
    }
}

Count cbam_channel_flops(Count c, Count hw, Count r) {
    // avg+max pool, shared MLP on both, relu, sum, sigmoid, gate
    return 2 * c + 2 * (2 * c * c / r) + 2 * (c / r) + c + c + c * hw;
}

Count cbam_spatial_flops(Count c, Count hw, Count k) {
    // channel avg+max, 2->1 kxk conv, sigmoid, gate
    return 2 * hw + 2 * k * k * hw + hw + c * hw;
}

struct Enumerated {
    Count scales;
    Count trainable;
};

Enumerated enumerate(NamChannelAttention& m) {
    return {m.bn.gamma.value.size(), m.bn.gamma.value.size() + m.bn.beta.value.size()};
}

Enumerated enumerate(NamSpatialAttention& m) {
    return {m.pn.lambda.value.size(), m.pn.lambda.value.size() + m.pn.beta_s.value.size()};
}

Enumerated enumerate(SeChannelAttention& m) {
    const Count n = m.w1.value.size() + m.w2.value.size();
    return {n, n};
}

void check_agreement(Count formula, Count enumerated, const std::string& what) {
    if (formula != enumerated) {
        throw Error("accounting: " + what + " formula gives " + std::to_string(formula) +
                    " but the constructed module has " + std::to_string(enumerated));
    }
}

CountRow nam_channel_row(const BlockDims& d) {
    NamChannelAttention module(d.channels());
    const auto e = enumerate(module);
    const auto formula = nam_channel_params(d);
    check_agreement(formula, e.scales, "NAM channel");
    return {"", "nam-channel", formula,
            attention_flops(AttentionKind::nam_channel, 1, d.channels(), d.height, d.width, 1), e.trainable};
}

CountRow nam_spatial_row(const BlockDims& d) {
    NamSpatialAttention module(d.height, d.width);
    const auto e = enumerate(module);
    const auto formula = nam_spatial_params(d);
    check_agreement(formula, e.scales, "NAM spatial");
    return {"", "nam-spatial", formula,
            attention_flops(AttentionKind::nam_spatial, 1, d.channels(), d.height, d.width, 1), e.trainable};
}

CountRow mlp_row(const BlockDims& d, std::size_t r, bool cbam) {
    SeChannelAttention module(d.channels(), r);
    const auto e = enumerate(module);
    const auto formula = cbam ? cbam_channel_params(d, r) : se_params(d.channels(), r);
    check_agreement(formula, e.scales, cbam ? "CBAM channel" : "SE");
    const Count flops = cbam ? cbam_channel_flops(d.channels(), Count{d.height} * d.width, r)
                             : attention_flops(AttentionKind::se, 1, d.channels(), d.height, d.width, r);
    return {"", cbam ? "cbam-channel" : "se", formula, flops, e.trainable};
}

CountRow cbam_spatial_row(const BlockDims& d, std::size_t k) {
    const auto formula = cbam_spatial_params(k);
    return {"", "cbam-spatial", formula, cbam_spatial_flops(d.channels(), Count{d.height} * d.width, k), formula};
}

CountRow combine(CountRow a, const CountRow& b, std::string type) {
    a.type = std::move(type);
    a.params += b.params;
    a.flops += b.flops;
    a.trainable += b.trainable;
    return a;
}

} // namespace

std::vector<BlockDims> resnet50_block_dims() {
    return {{512, 4, 32, 32}, {256, 4, 16, 16}, {128, 4, 8, 8}, {64, 4, 4, 4}};
}

Count cbam_channel_params(const BlockDims& d, std::size_t reduction) {
    require_positive(d);
    const Count c = d.channels();
    require_divides(d.channels(), reduction);
    return c * c / reduction * 2;
}

Count nam_channel_params(const BlockDims& d) {
    require_positive(d);
    return Count{d.base_channels} * d.expansion;
}

Count cbam_spatial_params(std::size_t kernel) {
    if (kernel == 0 || kernel % 2 == 0) {
        throw ConfigError("CBAM spatial kernel must be odd and positive, got " + std::to_string(kernel));
    }
    return 2 * 1 * Count{kernel} * kernel;
}

Count nam_spatial_params(const BlockDims& d) {
    require_positive(d);
    return Count{d.height} * d.width;
}

Count se_params(std::size_t channels, std::size_t reduction) {
    require_divides(channels, reduction);
    return 2 * Count{channels} * (channels / reduction);
}

std::string_view to_string(CountAttention kind) {
    switch (kind) {
    case CountAttention::cbam_channel: return "cbam-channel";
    case CountAttention::cbam_spatial: return "cbam-spatial";
    case CountAttention::cbam: return "cbam";
    case CountAttention::nam_channel: return "nam-channel";
    case CountAttention::nam_spatial: return "nam-spatial";
    case CountAttention::nam: return "nam";
    case CountAttention::se: return "se";
    }
    throw ConfigError("unknown attention type");
}

CountAttention parse_count_attention(std::string_view text) {
    if (text == "nam-ch") return CountAttention::nam_channel;
    if (text == "nam-sp") return CountAttention::nam_spatial;
    for (auto k : {CountAttention::cbam_channel, CountAttention::cbam_spatial, CountAttention::cbam,
                   CountAttention::nam_channel, CountAttention::nam_spatial, CountAttention::nam, CountAttention::se}) {
        if (to_string(k) == text) return k;
    }
    throw ConfigError("unknown attention type '" + std::string(text) + "'");
}

CountReport count_report(std::span<const BlockDims> blocks, CountAttention attention, const CountOptions& options) {
    if (blocks.empty()) throw ConfigError("count_report: no blocks");
    CountReport report{attention, {}, 0, 0, 0};
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& d = blocks[i];
        require_positive(d);
        CountRow row;
        switch (attention) {
        case CountAttention::cbam_channel: row = mlp_row(d, options.reduction, true); break;
        case CountAttention::cbam_spatial: row = cbam_spatial_row(d, options.kernel); break;
        case CountAttention::cbam:
            row = combine(mlp_row(d, options.reduction, true), cbam_spatial_row(d, options.kernel), "cbam");
            break;
        case CountAttention::nam_channel: row = nam_channel_row(d); break;
        case CountAttention::nam_spatial: row = nam_spatial_row(d); break;
        case CountAttention::nam: row = combine(nam_channel_row(d), nam_spatial_row(d), "nam"); break;
        case CountAttention::se: row = mlp_row(d, options.reduction, false); break;
        default: throw ConfigError("count_report: unknown attention type");
        }
        row.block = "Block" + std::to_string(i + 1);
        report.total_params += row.params;
        report.total_flops += row.flops;
        report.total_trainable += row.trainable;
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string to_csv(const CountReport& report) {
    std::ostringstream os;
    os << "# flops: " << flop_convention << "; params: attention weights only; trainable: all trainable values\n";
    os << "block,type,params,flops,trainable\n";
    for (const auto& r : report.rows) {
        os << r.block << ',' << r.type << ',' << r.params << ',' << r.flops << ',' << r.trainable << '\n';
    }
    os << "Overhead," << to_string(report.attention) << ',' << report.total_params << ',' << report.total_flops << ','
       << report.total_trainable << '\n';
    return os.str();
}

std::string to_json(const CountReport& report) {
    nlohmann::ordered_json j;
    j["attention"] = to_string(report.attention);
    j["flop_convention"] = flop_convention;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) {
        nlohmann::ordered_json row;
        row["block"] = r.block;
        row["type"] = r.type;
        row["params"] = r.params;
        row["flops"] = r.flops;
        row["trainable"] = r.trainable;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    j["totals"] = {{"params", report.total_params}, {"flops", report.total_flops},
                   {"trainable", report.total_trainable}};
    return j.dump(2) + "\n";
}

Count attention_flops(AttentionKind kind, std::size_t n, std::size_t channels, std::size_t height, std::size_t width,
                      std::size_t reduction) {
    const Count c = channels;
    const Count hw = Count{height} * width;
    Count per_sample = 0;
    switch (kind) {
    case AttentionKind::none: break;
    // normalization, scale by W, sigmoid, gate; plus computing W itself
    case AttentionKind::nam_channel: per_sample = 4 * c * hw + c; break;
    case AttentionKind::nam_spatial: per_sample = 4 * c * hw + hw; break;
    case AttentionKind::nam: per_sample = 8 * c * hw + c + hw; break;
    case AttentionKind::se: {
        require_divides(channels, reduction);
        const Count h = c / reduction;
        per_sample = c + c * h + h + h * c + c + c * hw;
        break;
    }
    }
    return per_sample * n;
}

Count flops_estimate(const ModelSpec& model, std::span<const std::size_t> input_dims) {
    if (input_dims.size() == 2) {
        if (!model.blocks.empty()) throw ShapeError("flops_estimate: [N,D] input only resolves for a block-free model");
        return Count{input_dims[0]} * input_dims[1] * model.num_classes;
    }
    if (input_dims.size() != 4) throw ShapeError("flops_estimate: input dims must be [N,C,H,W] or [N,D]");
    const Count n = input_dims[0];
    if (input_dims[1] != model.input_channels || input_dims[2] != model.input_height ||
        input_dims[3] != model.input_width) {
        throw ShapeError("flops_estimate: input dims do not match the model input");
    }
    const auto dims = resolve_shapes(model);

    Count total = 0;
    Count in_c = model.input_channels;
    for (std::size_t i = 0; i < model.blocks.size(); ++i) {
        const auto& b = model.blocks[i];
        const Count out = Count{dims[i].channels} * dims[i].height * dims[i].width;
        const Count k2 = Count{b.kernel} * b.kernel;
        const Count positions = Count{dims[i].height} * dims[i].width;
        total += n * b.out_channels * in_c * k2 * positions;
        if (b.batch_norm) total += n * out;
        if (b.kind == BlockKind::residual) {
            total += n * out; // inner relu
            total += n * b.out_channels * b.out_channels * k2 * positions;
            if (b.batch_norm) total += n * out;
            if (b.stride != 1 || in_c != b.out_channels) {
                total += n * b.out_channels * in_c * positions;
                if (b.batch_norm) total += n * out;
            }
            total += n * out; // residual add
        }
        if (b.activation == Activation::relu) total += n * out;
        total += attention_flops(b.attention.kind, n, dims[i].channels, dims[i].height, dims[i].width,
                                 b.attention.reduction);
        in_c = b.out_channels;
    }
    if (model.num_classes > 0) {
        total += n * in_c;                     // global average pool
        total += n * in_c * model.num_classes; // dense
    }
    return total;
}

} // namespace nam
