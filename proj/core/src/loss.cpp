#include "nam/loss.hpp"

#include <cmath>

#include "nam/error.hpp"
#include "nam/network.hpp"
#include "nam/ops.hpp"

namespace nam {

PenaltyScales collect_penalty_scales(ForwardContext& ctx, Network& net, const PenaltyConfig& cfg) {
    PenaltyScales out;
    for (const auto& group : net.nam_scales()) {
        if (group.kind == ScaleGroup::Kind::channel && cfg.include_channel) out.channel.push_back(ctx.bind(*group.parameter));
        if (group.kind == ScaleGroup::Kind::spatial && cfg.include_spatial) out.spatial.push_back(ctx.bind(*group.parameter));
    }
    if (cfg.include_backbone) {
        for (auto* p : net.backbone_bn_scales()) out.channel.push_back(ctx.bind(*p));
    }
    return out;
}

Var total_loss(Var logits, std::span<const int> labels, const PenaltyScales& scales, const PenaltyConfig& cfg) {
    if (!(cfg.p >= 0) || !std::isfinite(cfg.p)) throw ConfigError("penalty p must be a finite value >= 0");
    Var loss = softmax_cross_entropy(logits, labels);
    if (cfg.p == 0.0) return loss;
    for (const auto* group : {&scales.channel, &scales.spatial}) {
        for (Var s : *group) loss = add(loss, scale(sum(absolute(s)), cfg.p));
    }
    return loss;
}

double penalty_sum(const PenaltyScales& scales) {
    double total = 0.0;
    for (const auto* group : {&scales.channel, &scales.spatial}) {
        for (Var s : *group) {
            for (double v : s.value().data()) total += std::abs(v);
        }
    }
    return total;
}

} // namespace nam
