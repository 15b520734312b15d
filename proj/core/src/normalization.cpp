#include "nam/normalization.hpp"

#include <cmath>
#include <vector>

#include "nam/error.hpp"

namespace nam {
namespace {

enum class FeatureAxis { channel, position };

struct RunningStats {
    Tensor& mean;
    Tensor& var;
    double eps;
    double momentum;
};

// Shared kernel for channel and pixel normalization. Feature f of flat index
// i is the channel (i / HW) % C or the position i % HW.
Var normalize_features(std::string_view op, ForwardContext& ctx, Var x, Var scale, Var shift,
                       FeatureAxis axis, RunningStats stats) {
    const auto& in = x.value();
    const auto C = in.dim(1), HW = in.dim(2) * in.dim(3);
    const auto F = axis == FeatureAxis::channel ? C : HW;
    const auto count = in.size() / F;
    const auto feature = [axis, C, HW](std::size_t i) {
        return axis == FeatureAxis::channel ? (i / HW) % C : i % HW;
    };

    std::vector<double> mean(F, 0.0), var(F, 0.0);
    if (ctx.mode() == Mode::train) {
        if (count < 2) {
            throw ShapeError(std::string(op) + ": train mode needs at least 2 values per feature, input " +
                             to_string(in.shape()) + " gives " + std::to_string(count));
        }
        for (std::size_t i = 0; i < in.size(); ++i) mean[feature(i)] += in[i];
        for (auto& m : mean) m /= static_cast<double>(count);
        for (std::size_t i = 0; i < in.size(); ++i) {
            const double d = in[i] - mean[feature(i)];
            var[feature(i)] += d * d;
        }
        for (auto& v : var) v /= static_cast<double>(count);

        std::vector<double> rm(stats.mean.data().begin(), stats.mean.data().end());
        std::vector<double> rv(stats.var.data().begin(), stats.var.data().end());
        const double unbias = static_cast<double>(count) / static_cast<double>(count - 1);
        for (std::size_t f = 0; f < F; ++f) {
            rm[f] = (1.0 - stats.momentum) * rm[f] + stats.momentum * mean[f];
            rv[f] = (1.0 - stats.momentum) * rv[f] + stats.momentum * var[f] * unbias;
        }
        stats.mean = Tensor({F}, std::move(rm));
        stats.var = Tensor({F}, std::move(rv));
    } else {
        for (std::size_t f = 0; f < F; ++f) {
            mean[f] = stats.mean[f];
            var[f] = stats.var[f];
        }
    }

    std::vector<double> inv_std(F);
    for (std::size_t f = 0; f < F; ++f) inv_std[f] = 1.0 / std::sqrt(var[f] + stats.eps);

    const auto& gamma = scale.value();
    const auto& beta = shift.value();
    std::vector<double> xhat(in.size()), out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        const auto f = feature(i);
        xhat[i] = (in[i] - mean[f]) * inv_std[f];
        out[i] = gamma[f] * xhat[i] + beta[f];
    }

    const bool batch_stats = ctx.mode() == Mode::train;
    return ctx.tape().record(
        op, Tensor(in.shape(), std::move(out)), {x, scale, shift},
        [xhat = std::move(xhat), inv_std = std::move(inv_std), gamma, feature, F, count,
         batch_stats](std::span<const double> g, std::span<double* const> sinks) {
            std::vector<double> sum_g(F, 0.0), sum_gx(F, 0.0);
            for (std::size_t i = 0; i < g.size(); ++i) {
                sum_g[feature(i)] += g[i];
                sum_gx[feature(i)] += g[i] * xhat[i];
            }
            if (sinks[1]) {
                for (std::size_t f = 0; f < F; ++f) sinks[1][f] += sum_gx[f];
            }
            if (sinks[2]) {
                for (std::size_t f = 0; f < F; ++f) sinks[2][f] += sum_g[f];
            }
            if (!sinks[0]) return;
            const double inv_m = 1.0 / static_cast<double>(count);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const auto f = feature(i);
                const double k = gamma[f] * inv_std[f];
                if (batch_stats) {
                    sinks[0][i] += k * (g[i] - sum_g[f] * inv_m - xhat[i] * sum_gx[f] * inv_m);
                } else {
                    sinks[0][i] += k * g[i];
                }
            }
        });
}

void require_nchw(Var x, const char* op) {
    if (x.value().rank() != 4) {
        throw ShapeError(std::string(op) + ": expected [N,C,H,W] input, got " + to_string(x.shape()));
    }
}

void check_hyper(double eps, double momentum, const char* what) {
    if (!(eps > 0)) throw ConfigError(std::string(what) + ": eps must be positive");
    if (!(momentum > 0 && momentum <= 1)) throw ConfigError(std::string(what) + ": momentum must lie in (0,1]");
}

} // namespace

BatchNormChannel::BatchNormChannel(std::size_t channels, std::string name_, double eps_, double momentum_)
    : name(std::move(name_)),
      gamma{name + ".gamma", Tensor::full({channels}, 1.0)},
      beta{name + ".beta", Tensor::zeros({channels})},
      running_mean(Tensor::zeros({channels})),
      running_var(Tensor::full({channels}, 1.0)),
      eps(eps_),
      momentum(momentum_) {
    check_hyper(eps, momentum, "BatchNormChannel");
}

PixelNorm::PixelNorm(std::size_t height, std::size_t width, std::string name_, double eps_, double momentum_)
    : name(std::move(name_)),
      lambda{name + ".lambda", Tensor::full({height * width}, 1.0)},
      beta_s{name + ".beta_s", Tensor::zeros({height * width})},
      running_mean(Tensor::zeros({height * width})),
      running_var(Tensor::full({height * width}, 1.0)),
      eps(eps_),
      momentum(momentum_),
      bound_height(height),
      bound_width(width) {
    check_hyper(eps, momentum, "PixelNorm");
}

Var batch_norm_forward(ForwardContext& ctx, Var x, BatchNormChannel& params) {
    require_nchw(x, "batch_norm");
    if (x.value().dim(1) != params.channels()) {
        throw ShapeError("batch_norm: input " + to_string(x.shape()) + " has " + std::to_string(x.value().dim(1)) +
                         " channels, parameters have " + std::to_string(params.channels()));
    }
    Var gamma = ctx.bind(params.gamma);
    Var beta = ctx.bind(params.beta);
    return normalize_features("batch_norm", ctx, x, gamma, beta, FeatureAxis::channel,
                              {params.running_mean, params.running_var, params.eps, params.momentum});
}

Var pixel_norm_forward(ForwardContext& ctx, Var x, PixelNorm& params) {
    require_nchw(x, "pixel_norm");
    const auto h = x.value().dim(2), w = x.value().dim(3);
    if (h != params.bound_height || w != params.bound_width) {
        throw ShapeError("pixel_norm: input " + to_string(x.shape()) + " has resolution " + std::to_string(h) + "x" +
                         std::to_string(w) + " but pixel normalization fixes input resolution at " +
                         std::to_string(params.bound_height) + "x" + std::to_string(params.bound_width));
    }
    Var lambda = ctx.bind(params.lambda);
    Var beta = ctx.bind(params.beta_s);
    return normalize_features("pixel_norm", ctx, x, lambda, beta, FeatureAxis::position,
                              {params.running_mean, params.running_var, params.eps, params.momentum});
}

Tensor normalized_weights(const Tensor& scales) {
    double total = 0.0;
    for (double s : scales.data()) total += std::abs(s);
    if (!(total > 0)) throw ConfigError("normalized_weights: all scales are zero (collapsed attention layer)");
    std::vector<double> out(scales.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(scales[i]) / total;
    return Tensor(scales.shape(), std::move(out));
}

Var normalized_weights(Var scales) {
    const auto& s = scales.value();
    Tensor w = normalized_weights(s);
    double total = 0.0;
    for (double v : s.data()) total += std::abs(v);

    return scales.tape->record(
        "normalized_weights", w, {scales}, [s, w, total](std::span<const double> g, std::span<double* const> sinks) {
            if (!sinks[0]) return;
            // d w_i / d|s_j| = (delta_ij - w_i) / total
            double dot = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * w[i];
            for (std::size_t j = 0; j < g.size(); ++j) {
                const double sign = s[j] > 0 ? 1.0 : (s[j] < 0 ? -1.0 : 0.0);
                sinks[0][j] += sign * (g[j] - dot) / total;
            }
        });
}

} // namespace nam
