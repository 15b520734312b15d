#include "nam/gradcheck_suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "nam/attention.hpp"
#include "nam/baselines.hpp"
#include "nam/error.hpp"
#include "nam/grad_check.hpp"
#include "nam/loss.hpp"
#include "nam/normalization.hpp"
#include "nam/ops.hpp"

namespace nam {
namespace {

using MultiFunction = std::function<Var(Tape&, const std::vector<Var>&)>;

struct Case {
    std::vector<Tensor> inputs;
    MultiFunction f;
};

class Inputs {
  public:
    explicit Inputs(std::uint64_t seed) : rng_(seed) {}

    Tensor uniform(Shape shape, double lo = -2.0, double hi = 2.0) {
        std::uniform_real_distribution<double> dist(lo, hi);
        std::vector<double> v(element_count(shape));
        for (auto& x : v) x = dist(rng_);
        return Tensor(std::move(shape), std::move(v));
    }

    // Magnitudes in [0.1, 2] with random sign, clear of the |.| and relu kinks.
    Tensor away_from_zero(Shape shape) {
        std::uniform_real_distribution<double> mag(0.1, 2.0);
        std::bernoulli_distribution neg(0.5);
        std::vector<double> v(element_count(shape));
        for (auto& x : v) x = neg(rng_) ? -mag(rng_) : mag(rng_);
        return Tensor(std::move(shape), std::move(v));
    }

    std::vector<int> labels(std::size_t n, int classes) {
        std::uniform_int_distribution<int> dist(0, classes - 1);
        std::vector<int> out(n);
        for (auto& y : out) y = dist(rng_);
        return out;
    }

    std::size_t pick(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }

    std::mt19937_64& rng() { return rng_; }

  private:
    std::mt19937_64 rng_;
};

// Reduces a tensor output to a scalar with fixed random weights, so no
// gradient component cancels the way it would under a plain sum.
Var project(Var y, const Tensor& weights) {
    if (y.value().size() == 1) return y;
    return weighted_sum(y, weights.reshaped(y.shape()));
}

double check_case(const Case& c, double eps) {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.inputs.size(); ++i) {
        ScalarFunction g = [&c, i](Var xi) {
            Tape& tape = *xi.tape;
            std::vector<Var> vars;
            for (std::size_t j = 0; j < c.inputs.size(); ++j) vars.push_back(j == i ? xi : tape.constant(c.inputs[j]));
            return c.f(tape, vars);
        };
        worst = std::max(worst, grad_check(g, c.inputs[i], eps));
    }
    return worst;
}

Case conv2d_case(Inputs& in) {
    const auto N = in.pick(1, 3), C = in.pick(1, 3), F = in.pick(1, 4), H = in.pick(4, 6), W = in.pick(4, 6);
    const auto k = in.pick(1, 3);
    const Conv2dOptions opt{in.pick(1, 2), in.pick(0, 1)};
    const auto Ho = (H + 2 * opt.padding - k) / opt.stride + 1, Wo = (W + 2 * opt.padding - k) / opt.stride + 1;
    const Tensor proj = in.uniform({N * F * Ho * Wo}, -1, 1);
    return {{in.uniform({N, C, H, W}), in.uniform({F, C, k, k}), in.uniform({F})},
            [proj, opt](Tape&, const std::vector<Var>& v) { return project(conv2d(v[0], v[1], v[2], opt), proj); }};
}

Case dense_case(Inputs& in) {
    const auto N = in.pick(1, 4), D = in.pick(1, 6), K = in.pick(1, 5);
    const Tensor proj = in.uniform({N * K}, -1, 1);
    return {{in.uniform({N, D}), in.uniform({D, K}), in.uniform({K})},
            [proj](Tape&, const std::vector<Var>& v) { return project(dense(v[0], v[1], v[2]), proj); }};
}

Case sigmoid_case(Inputs& in) {
    const Tensor proj = in.uniform({12}, -1, 1);
    return {{in.uniform({3, 4}, -6, 6)}, [proj](Tape&, const std::vector<Var>& v) { return project(sigmoid(v[0]), proj); }};
}

Case relu_case(Inputs& in) {
    const Tensor proj = in.uniform({12}, -1, 1);
    return {{in.away_from_zero({3, 4})}, [proj](Tape&, const std::vector<Var>& v) { return project(relu(v[0]), proj); }};
}

Case gap_case(Inputs& in) {
    const auto N = in.pick(1, 3), C = in.pick(1, 4);
    const Tensor proj = in.uniform({N * C}, -1, 1);
    return {{in.uniform({N, C, in.pick(1, 4), in.pick(1, 4)})},
            [proj](Tape&, const std::vector<Var>& v) { return project(global_avg_pool(v[0]), proj); }};
}

Case cross_entropy_case(Inputs& in) {
    const auto N = in.pick(1, 5), K = in.pick(2, 6);
    const auto labels = in.labels(N, static_cast<int>(K));
    return {{in.uniform({N, K}, -4, 4)},
            [labels](Tape&, const std::vector<Var>& v) { return softmax_cross_entropy(v[0], labels); }};
}

Case batch_norm_case(Inputs& in) {
    const auto N = in.pick(2, 4), C = in.pick(1, 4), H = in.pick(2, 3), W = in.pick(2, 3);
    const Tensor proj = in.uniform({N * C * H * W}, -1, 1);
    return {{in.uniform({N, C, H, W}), in.uniform({C}), in.uniform({C})},
            [proj, C](Tape& tape, const std::vector<Var>& v) {
                BatchNormChannel bn(C);
                ForwardContext ctx(tape, Mode::train);
                ctx.bind_to(bn.gamma, v[1]);
                ctx.bind_to(bn.beta, v[2]);
                return project(batch_norm_forward(ctx, v[0], bn), proj);
            }};
}

// Normalization cases keep at least four values per feature: with two, the
// output is nearly +-1 and its gradient drowns in finite-difference roundoff.
Case pixel_norm_case(Inputs& in) {
    const auto N = in.pick(2, 3), C = in.pick(2, 4), H = in.pick(2, 3), W = in.pick(2, 3);
    const Tensor proj = in.uniform({N * C * H * W}, -1, 1);
    return {{in.uniform({N, C, H, W}), in.uniform({H * W}), in.uniform({H * W})},
            [proj, H, W](Tape& tape, const std::vector<Var>& v) {
                PixelNorm pn(H, W);
                ForwardContext ctx(tape, Mode::train);
                ctx.bind_to(pn.lambda, v[1]);
                ctx.bind_to(pn.beta_s, v[2]);
                return project(pixel_norm_forward(ctx, v[0], pn), proj);
            }};
}

Case normalized_weights_case(Inputs& in) {
    const auto n = in.pick(1, 8);
    const Tensor proj = in.uniform({n}, -1, 1);
    return {{in.away_from_zero({n})},
            [proj](Tape&, const std::vector<Var>& v) { return project(normalized_weights(v[0]), proj); }};
}

Case nam_case(Inputs& in, NamMode mode) {
    const auto N = in.pick(2, 3), C = in.pick(2, 4), H = in.pick(2, 3), W = in.pick(2, 3);
    const Tensor proj = in.uniform({N * C * H * W}, -1, 1);
    std::vector<Tensor> inputs{in.uniform({N, C, H, W})};
    const bool channel = mode != NamMode::spatial_only, spatial = mode != NamMode::channel_only;
    if (channel) {
        inputs.push_back(in.away_from_zero({C}));
        inputs.push_back(in.uniform({C}));
    }
    if (spatial) {
        inputs.push_back(in.away_from_zero({H * W}));
        inputs.push_back(in.uniform({H * W}));
    }
    return {std::move(inputs), [=](Tape& tape, const std::vector<Var>& v) {
                NamModule m({mode, Placement::end_of_block}, C, H, W, "nam");
                ForwardContext ctx(tape, Mode::train);
                std::size_t next = 1;
                if (channel) {
                    ctx.bind_to(m.channel->bn.gamma, v[next++]);
                    ctx.bind_to(m.channel->bn.beta, v[next++]);
                }
                if (spatial) {
                    ctx.bind_to(m.spatial->pn.lambda, v[next++]);
                    ctx.bind_to(m.spatial->pn.beta_s, v[next++]);
                }
                return project(m.forward(ctx, v[0]), proj);
            }};
}

Case se_case(Inputs& in) {
    const auto r = in.pick(2, 4), C = r * in.pick(1, 3), N = in.pick(1, 3), H = in.pick(1, 3), W = in.pick(1, 3);
    const auto h = C / r;
    const Tensor proj = in.uniform({N * C * H * W}, -1, 1);
    // Weights in [-1,1] keep the gate out of sigmoid saturation, where the
    // gradient is too small for a finite-difference comparison. Inputs are
    // redrawn until every hidden pre-activation clears the relu kink.
    Tensor x, w1;
    for (bool clear = false; !clear;) {
        x = in.uniform({N, C, H, W});
        w1 = in.uniform({C, h}, -1, 1);
        clear = true;
        for (std::size_t n = 0; n < N && clear; ++n) {
            for (std::size_t j = 0; j < h; ++j) {
                double z = 0.0;
                for (std::size_t c = 0; c < C; ++c) {
                    double pooled = 0.0;
                    for (std::size_t p = 0; p < H * W; ++p) pooled += x[(n * C + c) * H * W + p];
                    z += pooled / static_cast<double>(H * W) * w1.at({c, j});
                }
                if (std::abs(z) < 0.05) clear = false;
            }
        }
    }
    return {{x, w1, in.uniform({h, C}, -1, 1)},
            [proj, C, r](Tape& tape, const std::vector<Var>& v) {
                SeChannelAttention se(C, r);
                ForwardContext ctx(tape, Mode::train);
                ctx.bind_to(se.w1, v[1]);
                ctx.bind_to(se.w2, v[2]);
                return project(se_forward(ctx, v[0], se), proj);
            }};
}

Case total_loss_case(Inputs& in) {
    const auto N = in.pick(2, 4), K = in.pick(2, 6), C = in.pick(1, 5), P = in.pick(1, 9);
    const auto labels = in.labels(N, static_cast<int>(K));
    PenaltyConfig cfg;
    cfg.p = std::uniform_real_distribution<double>(0.01, 0.5)(in.rng());
    return {{in.uniform({N, K}, -4, 4), in.away_from_zero({C}), in.away_from_zero({P})},
            [labels, cfg](Tape&, const std::vector<Var>& v) {
                PenaltyScales scales{{v[1]}, {v[2]}};
                return total_loss(v[0], labels, scales, cfg);
            }};
}

const std::map<std::string, std::function<Case(Inputs&)>, std::less<>>& registry() {
    static const std::map<std::string, std::function<Case(Inputs&)>, std::less<>> ops = {
        {"conv2d", conv2d_case},
        {"dense", dense_case},
        {"sigmoid", sigmoid_case},
        {"relu", relu_case},
        {"global_avg_pool", gap_case},
        {"softmax_cross_entropy", cross_entropy_case},
        {"batch_norm", batch_norm_case},
        {"pixel_norm", pixel_norm_case},
        {"normalized_weights", normalized_weights_case},
        {"nam_channel", [](Inputs& in) { return nam_case(in, NamMode::channel_only); }},
        {"nam_spatial", [](Inputs& in) { return nam_case(in, NamMode::spatial_only); }},
        {"nam", [](Inputs& in) { return nam_case(in, NamMode::channel_then_spatial); }},
        {"se", se_case},
        {"total_loss", total_loss_case},
    };
    return ops;
}

} // namespace

const std::vector<std::string>& gradcheck_ops() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, _] : registry()) out.push_back(name);
        return out;
    }();
    return names;
}

double run_gradcheck(std::string_view op, std::uint64_t seed, double eps) {
    const auto it = registry().find(op);
    if (it == registry().end()) throw ConfigError("gradcheck: unknown op '" + std::string(op) + "'");
    Inputs in(seed);
    return check_case(it->second(in), eps);
}

} // namespace nam
