#pragma once

#include <cstddef>
#include <string>

#include "nam/module.hpp"

namespace nam {

/// Batch normalization over the channel axis of [N,C,H,W] inputs. The scale
/// `gamma` doubles as the channel-importance signal for NAM.
struct BatchNormChannel {
    explicit BatchNormChannel(std::size_t channels, std::string name = "bn", double eps = 1e-5,
                              double momentum = 0.1);

    std::size_t channels() const noexcept { return gamma.value.size(); }

    std::string name;
    Parameter gamma;
    Parameter beta;
    Tensor running_mean;
    Tensor running_var;
    double eps;
    double momentum;
};

/// Batch normalization transposed onto the spatial axes: one scale `lambda`
/// and shift `beta_s` per pixel position, statistics over (N,C). The input
/// resolution is fixed at construction.
struct PixelNorm {
    PixelNorm(std::size_t height, std::size_t width, std::string name = "pn", double eps = 1e-5,
              double momentum = 0.1);

    std::size_t positions() const noexcept { return bound_height * bound_width; }

    std::string name;
    Parameter lambda;
    Parameter beta_s;
    Tensor running_mean;
    Tensor running_var;
    double eps;
    double momentum;
    std::size_t bound_height;
    std::size_t bound_width;
};

/// Train mode normalizes with mini-batch statistics over (N,H,W) and updates
/// the running averages; eval mode uses the running statistics only.
Var batch_norm_forward(ForwardContext& ctx, Var x, BatchNormChannel& params);

/// Same arithmetic as batch_norm_forward with spatial positions in the role
/// of channels.
Var pixel_norm_forward(ForwardContext& ctx, Var x, PixelNorm& params);

/// |s_i| / sum_j |s_j|. Rejects an all-zero input.
Var normalized_weights(Var scales);
Tensor normalized_weights(const Tensor& scales);

} // namespace nam
