#pragma once

#include <span>
#include <vector>

#include "nam/module.hpp"

namespace nam {

class Network;

/// Sparsity penalty p and the scale groups it covers. By default only the
/// NAM-internal gamma (channel) and lambda (spatial) are penalized.
struct PenaltyConfig {
    double p = 0.0;
    bool include_channel = true;
    bool include_spatial = true;
    bool include_backbone = false;
};

/// Scale vectors bound on the current tape.
struct PenaltyScales {
    std::vector<Var> channel;
    std::vector<Var> spatial;
};

/// Binds the scales of `net` that `cfg` covers. Backbone batch-norm gammas
/// count as channel scales.
PenaltyScales collect_penalty_scales(ForwardContext& ctx, Network& net, const PenaltyConfig& cfg);

/// Softmax cross-entropy plus p * sum|gamma| + p * sum|lambda|. With p == 0
/// the result is the cross-entropy node itself.
Var total_loss(Var logits, std::span<const int> labels, const PenaltyScales& scales, const PenaltyConfig& cfg);

/// sum|gamma| + sum|lambda| over the given scales, without the factor p.
double penalty_sum(const PenaltyScales& scales);

} // namespace nam
