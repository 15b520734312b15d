#include "nam/network.hpp"

#include <cmath>
#include <random>

#include "nam/error.hpp"
#include "nam/ops.hpp"

namespace nam {
namespace {

Tensor he_normal(const Shape& shape, std::size_t fan_in, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    std::vector<double> v(element_count(shape));
    for (auto& x : v) x = dist(rng);
    return Tensor(shape, std::move(v));
}

constexpr std::size_t header_fields = 5;
constexpr std::size_t block_fields = 12;

std::size_t as_count(double v, const char* what) {
    if (!(v >= 0) || v != std::floor(v) || v > 1e12) {
        throw DataError(std::string("architecture record: invalid ") + what);
    }
    return static_cast<std::size_t>(v);
}

} // namespace

Network::Network(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
    const auto dims = resolve_shapes(spec_);
    std::mt19937_64 rng(seed);
    std::size_t in_channels = spec_.input_channels;

    for (std::size_t i = 0; i < spec_.blocks.size(); ++i) {
        const auto& bs = spec_.blocks[i];
        const auto prefix = "block" + std::to_string(i);
        const auto out = bs.out_channels;
        const auto k = bs.kernel;

        Block b{bs, Parameter{prefix + ".conv1", he_normal({out, in_channels, k, k}, in_channels * k * k, rng)},
                {}, {}, {}, {}, {}, {}, {}, {}};
        if (bs.batch_norm) {
            b.bn1.emplace(out, prefix + ".bn1");
        } else {
            b.conv1_bias = Parameter{prefix + ".conv1_bias", Tensor::zeros({out})};
        }
        if (bs.kind == BlockKind::residual) {
            b.conv2 = Parameter{prefix + ".conv2", he_normal({out, out, k, k}, out * k * k, rng)};
            if (bs.batch_norm) b.bn2.emplace(out, prefix + ".bn2");
            if (bs.stride != 1 || in_channels != out) {
                b.skip_conv = Parameter{prefix + ".skip_conv", he_normal({out, in_channels, 1, 1}, in_channels, rng)};
                if (bs.batch_norm) b.skip_bn.emplace(out, prefix + ".skip_bn");
            }
        }

        const auto& a = bs.attention;
        switch (a.kind) {
        case AttentionKind::none: break;
        case AttentionKind::nam_channel:
            b.nam.emplace(NamBlockConfig{NamMode::channel_only}, a.channels, a.height, a.width, prefix + ".nam");
            break;
        case AttentionKind::nam_spatial:
            b.nam.emplace(NamBlockConfig{NamMode::spatial_only}, a.channels, a.height, a.width, prefix + ".nam");
            break;
        case AttentionKind::nam:
            b.nam.emplace(NamBlockConfig{NamMode::channel_then_spatial}, a.channels, a.height, a.width,
                          prefix + ".nam");
            break;
        case AttentionKind::se:
            b.se.emplace(a.channels, a.reduction, prefix + ".se");
            b.se->initialize(rng);
            break;
        }
        blocks_.push_back(std::move(b));
        in_channels = dims[i].channels;
    }

    if (spec_.num_classes > 0) {
        const auto d = in_channels;
        head_weight_ = Parameter{"head.weight", he_normal({d, spec_.num_classes}, d, rng)};
        head_bias_ = Parameter{"head.bias", Tensor::zeros({spec_.num_classes})};
    }
}

Var Network::forward(ForwardContext& ctx, Var input) {
    const auto& shape = input.shape();
    if (shape.size() != 4 || shape[1] != spec_.input_channels || shape[2] != spec_.input_height ||
        shape[3] != spec_.input_width) {
        throw ShapeError("network expects input [N," + std::to_string(spec_.input_channels) + "," +
                         std::to_string(spec_.input_height) + "," + std::to_string(spec_.input_width) + "], got " +
                         to_string(shape));
    }

    Var x = input;
    for (auto& b : blocks_) {
        const auto& bs = b.spec;
        Var y = conv2d(x, ctx.bind(b.conv1),
                       b.conv1_bias ? std::optional<Var>(ctx.bind(*b.conv1_bias)) : std::nullopt,
                       {bs.stride, bs.padding});
        if (b.bn1) y = batch_norm_forward(ctx, y, *b.bn1);
        if (bs.kind == BlockKind::residual) {
            y = relu(y);
            y = conv2d(y, ctx.bind(*b.conv2), std::nullopt, {1, bs.padding});
            if (b.bn2) y = batch_norm_forward(ctx, y, *b.bn2);
            Var skip = x;
            if (b.skip_conv) {
                skip = conv2d(x, ctx.bind(*b.skip_conv), std::nullopt, {bs.stride, 0});
                if (b.skip_bn) skip = batch_norm_forward(ctx, skip, *b.skip_bn);
            }
            y = add(y, skip);
        }
        if (bs.activation == Activation::relu) y = relu(y);
        if (b.nam) y = b.nam->forward(ctx, y);
        if (b.se) y = se_forward(ctx, y, *b.se);
        x = y;
    }

    if (!head_weight_) return x;
    return dense(global_avg_pool(x), ctx.bind(*head_weight_), ctx.bind(*head_bias_));
}

template <class OnParameter, class OnBuffer>
void Network::for_each_tensor(OnParameter&& on_parameter, OnBuffer&& on_buffer) {
    auto bn = [&](BatchNormChannel& n) {
        on_parameter(n.gamma);
        on_parameter(n.beta);
        on_buffer(n.name + ".running_mean", n.running_mean);
        on_buffer(n.name + ".running_var", n.running_var);
    };
    for (auto& b : blocks_) {
        on_parameter(b.conv1);
        if (b.conv1_bias) on_parameter(*b.conv1_bias);
        if (b.bn1) bn(*b.bn1);
        if (b.conv2) on_parameter(*b.conv2);
        if (b.bn2) bn(*b.bn2);
        if (b.skip_conv) on_parameter(*b.skip_conv);
        if (b.skip_bn) bn(*b.skip_bn);
        if (b.nam) {
            if (b.nam->channel) bn(b.nam->channel->bn);
            if (b.nam->spatial) {
                auto& pn = b.nam->spatial->pn;
                on_parameter(pn.lambda);
                on_parameter(pn.beta_s);
                on_buffer(pn.name + ".running_mean", pn.running_mean);
                on_buffer(pn.name + ".running_var", pn.running_var);
            }
        }
        if (b.se) {
            on_parameter(b.se->w1);
            on_parameter(b.se->w2);
        }
    }
    if (head_weight_) {
        on_parameter(*head_weight_);
        on_parameter(*head_bias_);
    }
}

std::vector<Parameter*> Network::parameters() {
    std::vector<Parameter*> out;
    for_each_tensor([&out](Parameter& p) { out.push_back(&p); }, [](const std::string&, Tensor&) {});
    return out;
}

std::size_t Network::parameter_count() {
    std::size_t n = 0;
    for (auto* p : parameters()) n += p->value.size();
    return n;
}

std::vector<ScaleGroup> Network::nam_scales() {
    std::vector<ScaleGroup> out;
    for (auto& b : blocks_) {
        if (!b.nam) continue;
        if (b.nam->channel) out.push_back({ScaleGroup::Kind::channel, &b.nam->channel->bn.gamma});
        if (b.nam->spatial) out.push_back({ScaleGroup::Kind::spatial, &b.nam->spatial->pn.lambda});
    }
    return out;
}

std::vector<Parameter*> Network::backbone_bn_scales() {
    std::vector<Parameter*> out;
    for (auto& b : blocks_) {
        for (auto* bn : {&b.bn1, &b.bn2, &b.skip_bn}) {
            if (*bn) out.push_back(&(*bn)->gamma);
        }
    }
    return out;
}

std::vector<NamedTensor> Network::state() {
    std::vector<NamedTensor> out;
    out.push_back({spec_record_name, encode_spec(spec_)});
    for_each_tensor([&out](Parameter& p) { out.push_back({p.name, p.value}); },
                    [&out](const std::string& name, Tensor& t) { out.push_back({name, t}); });
    return out;
}

void Network::load_state(const std::vector<NamedTensor>& tensors) {
    auto assign = [&tensors](const std::string& name, Tensor& dst) {
        for (const auto& t : tensors) {
            if (t.name != name) continue;
            if (dst.shape() != t.value.shape()) {
                throw DataError("checkpoint tensor '" + name + "' has shape " + to_string(t.value.shape()) +
                                ", model expects " + to_string(dst.shape()));
            }
            dst = t.value.with_requires_grad(false);
            return;
        }
        throw DataError("checkpoint is missing tensor '" + name + "'");
    };
    for_each_tensor([&](Parameter& p) { assign(p.name, p.value); },
                    [&](const std::string& name, Tensor& t) { assign(name, t); });
}

Tensor Network::encode_spec(const ModelSpec& spec) {
    std::vector<double> v{static_cast<double>(spec.input_channels), static_cast<double>(spec.input_height),
                          static_cast<double>(spec.input_width), static_cast<double>(spec.num_classes),
                          static_cast<double>(spec.blocks.size())};
    for (const auto& b : spec.blocks) {
        const auto& a = b.attention;
        for (auto x : {static_cast<std::size_t>(b.kind), b.out_channels, b.kernel, b.stride, b.padding,
                       static_cast<std::size_t>(b.batch_norm), static_cast<std::size_t>(b.activation),
                       static_cast<std::size_t>(a.kind), a.channels, a.height, a.width, a.reduction}) {
            v.push_back(static_cast<double>(x));
        }
    }
    const std::size_t n = v.size();
    return Tensor({n}, std::move(v));
}

ModelSpec Network::decode_spec(const Tensor& encoded) {
    const auto d = encoded.data();
    if (encoded.rank() != 1 || d.size() < header_fields) throw DataError("architecture record too short");
    ModelSpec spec;
    spec.input_channels = as_count(d[0], "input channels");
    spec.input_height = as_count(d[1], "input height");
    spec.input_width = as_count(d[2], "input width");
    spec.num_classes = as_count(d[3], "class count");
    const auto n = as_count(d[4], "block count");
    if (d.size() != header_fields + n * block_fields) throw DataError("architecture record has wrong length");
    for (std::size_t i = 0; i < n; ++i) {
        const auto* f = d.data() + header_fields + i * block_fields;
        BlockSpec b;
        const auto kind = as_count(f[0], "block kind");
        if (kind > static_cast<std::size_t>(BlockKind::residual)) throw DataError("architecture record: block kind");
        b.kind = static_cast<BlockKind>(kind);
        b.out_channels = as_count(f[1], "channels");
        b.kernel = as_count(f[2], "kernel");
        b.stride = as_count(f[3], "stride");
        b.padding = as_count(f[4], "padding");
        b.batch_norm = as_count(f[5], "batch norm flag") != 0;
        const auto act = as_count(f[6], "activation");
        if (act > static_cast<std::size_t>(Activation::relu)) throw DataError("architecture record: activation");
        b.activation = static_cast<Activation>(act);
        const auto att = as_count(f[7], "attention");
        if (att > static_cast<std::size_t>(AttentionKind::se)) throw DataError("architecture record: attention");
        b.attention.kind = static_cast<AttentionKind>(att);
        b.attention.channels = as_count(f[8], "attention channels");
        b.attention.height = as_count(f[9], "attention height");
        b.attention.width = as_count(f[10], "attention width");
        b.attention.reduction = as_count(f[11], "reduction");
        spec.blocks.push_back(b);
    }
    return spec;
}

} // namespace nam
