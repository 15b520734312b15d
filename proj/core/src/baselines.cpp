#include "nam/baselines.hpp"

#include <cmath>
#include <vector>

#include "nam/error.hpp"
#include "nam/ops.hpp"

namespace nam {
namespace {

std::size_t bottleneck(std::size_t channels, std::size_t reduction) {
    if (channels == 0 || reduction == 0 || channels % reduction != 0) {
        throw ConfigError("SE reduction " + std::to_string(reduction) + " must divide " + std::to_string(channels) +
                          " channels");
    }
    return channels / reduction;
}

Tensor he_normal(const Shape& shape, std::size_t fan_in, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    std::vector<double> v(element_count(shape));
    for (auto& x : v) x = dist(rng);
    return Tensor(shape, std::move(v));
}

} // namespace

SeChannelAttention::SeChannelAttention(std::size_t channels, std::size_t reduction_, std::string name)
    : w1{name + ".w1", Tensor::zeros({channels, bottleneck(channels, reduction_)})},
      w2{name + ".w2", Tensor::zeros({channels / reduction_, channels})},
      reduction(reduction_) {}

void SeChannelAttention::initialize(std::mt19937_64& rng) {
    w1.value = he_normal(w1.value.shape(), channels(), rng);
    w2.value = he_normal(w2.value.shape(), hidden(), rng);
}

Var se_gate(ForwardContext& ctx, Var x, SeChannelAttention& att) {
    if (x.value().rank() != 4 || x.value().dim(1) != att.channels()) {
        throw ShapeError("se_forward: input " + to_string(x.shape()) + " does not match " +
                         std::to_string(att.channels()) + " channels");
    }
    Var squeezed = global_avg_pool(x);
    Var hidden = relu(dense(squeezed, ctx.bind(att.w1), std::nullopt));
    return sigmoid(dense(hidden, ctx.bind(att.w2), std::nullopt));
}

Var se_forward(ForwardContext& ctx, Var x, SeChannelAttention& att) {
    return gate_channels(x, se_gate(ctx, x, att));
}

} // namespace nam
