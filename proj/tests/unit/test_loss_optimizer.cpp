#include <algorithm>
#include <limits>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "nam/error.hpp"
#include "nam/grad_check.hpp"
#include "nam/loss.hpp"
#include "nam/network.hpp"
#include "nam/ops.hpp"
#include "nam/optimizer.hpp"

using namespace nam;

TEST_CASE("zero penalty returns the cross-entropy node itself") {
    Tape tape;
    Var logits = tape.constant(Tensor({2, 3}, {1, 2, 3, 0, 0, 1}));
    const std::vector<int> y{2, 0};
    Var gamma = tape.variable(Tensor({2}, {1.0, -2.0}));
    const PenaltyScales scales{{gamma}, {}};
    PenaltyConfig cfg;
    const Var loss = total_loss(logits, y, scales, cfg);
    CHECK(loss.value() == softmax_cross_entropy(logits, y).value());
    CHECK(tape.node(loss.id).op == "softmax_cross_entropy");
}

TEST_CASE("penalty term on frozen logits") {
    Tape tape;
    Var logits = tape.constant(Tensor({1, 2}, {0.3, -0.1}));
    const std::vector<int> y{1};
    const PenaltyScales scales{{tape.variable(Tensor({2}, {1.0, -2.0}))}, {}};
    PenaltyConfig cfg;
    cfg.p = 0.5;
    const double ce = softmax_cross_entropy(logits, y).value().item();
    CHECK(total_loss(logits, y, scales, cfg).value().item() == doctest::Approx(ce + 1.5).epsilon(1e-15));
}

TEST_CASE("loss decomposes and is monotone in p") {
    std::mt19937_64 rng(51);
    Network net(desk_scale_cnn(AttentionKind::nam, {4, 6}, 1, 8, 8, 5), 3);
    // Move scales off their initial value so the penalty is not trivial.
    for (const auto& g : net.nam_scales()) g.parameter->value = test::random_tensor(g.parameter->value.shape(), rng);
    const Tensor x = test::random_tensor({3, 1, 8, 8}, rng);
    const std::vector<int> y{0, 4, 2};

    auto loss_at = [&](double p, double* penalty = nullptr) {
        Tape tape;
        ForwardContext ctx(tape, Mode::eval);
        Var logits = net.forward(ctx, tape.constant(x));
        PenaltyConfig cfg;
        cfg.p = p;
        const auto scales = collect_penalty_scales(ctx, net, cfg);
        if (penalty) *penalty = penalty_sum(scales);
        return total_loss(logits, y, scales, cfg).value().item();
    };
    double covered = 0.0;
    const double base = loss_at(0.0, &covered);
    double direct = 0.0;
    for (const auto& g : net.nam_scales())
        for (double v : g.parameter->value.data()) direct += std::abs(v);
    CHECK(covered == doctest::Approx(direct).epsilon(1e-14));

    double prev = base;
    for (double p : {1e-4, 1e-3, 0.01, 0.1, 1.0}) {
        const double l = loss_at(p);
        CHECK(std::abs((l - base) - p * covered) < 1e-10);
        CHECK(l >= prev);
        prev = l;
    }
}

TEST_CASE("penalty coverage follows the flags") {
    Network net(desk_scale_cnn(AttentionKind::nam, {4, 6}, 1, 8, 8, 5), 3);
    Tape tape;
    ForwardContext ctx(tape, Mode::eval);
    PenaltyConfig cfg;
    auto scales = collect_penalty_scales(ctx, net, cfg);
    CHECK(scales.channel.size() == 2);
    CHECK(scales.spatial.size() == 2);
    cfg.include_spatial = false;
    cfg.include_backbone = true;
    scales = collect_penalty_scales(ctx, net, cfg);
    CHECK(scales.channel.size() == 4);
    CHECK(scales.spatial.empty());
}

TEST_CASE("penalty gradient is p times the sign away from zero") {
    const Tensor logits({2, 3}, {0.2, -1.0, 0.5, 1.0, 0.1, -0.3});
    const std::vector<int> y{0, 2};
    PenaltyConfig cfg;
    cfg.p = 0.3;
    const ScalarFunction f = [&](Var g) {
        Tape& tape = *g.tape;
        return total_loss(tape.constant(logits), y, {{g}, {}}, cfg);
    };
    const Tensor gamma({4}, {0.5, -0.2, 1.5, -3.0});
    Tape tape;
    Var gv = tape.variable(gamma);
    const Tensor g = tape.backward(f(gv)).grad(gv);
    for (std::size_t i = 0; i < 4; ++i) CHECK(g[i] == doctest::Approx(cfg.p * (gamma[i] > 0 ? 1 : -1)));
    CHECK(grad_check(f, gamma, 1e-5) < 1e-6);
}

TEST_CASE("negative penalty is rejected") {
    Tape tape;
    PenaltyConfig cfg;
    cfg.p = -1.0;
    CHECK_THROWS_AS(total_loss(tape.constant(Tensor({1, 2}, {0, 0})), std::vector<int>{0}, {}, cfg), ConfigError);
}

TEST_CASE("SGD examples") {
    Sgd plain(0.1, 0.0);
    Parameter p{"w", Tensor::scalar(5.0)};
    plain.step(p, Tensor::scalar(0.0));
    CHECK(p.value.item() == 5.0);
    plain.step(p, Tensor::scalar(1.0));
    CHECK(p.value.item() == doctest::Approx(4.9).epsilon(1e-15));

    // Momentum: v1 = 1, v2 = 0.9 + 1 = 1.9.
    Sgd heavy(0.1, 0.9);
    Parameter q{"q", Tensor::scalar(0.0)};
    heavy.step(q, Tensor::scalar(1.0));
    heavy.step(q, Tensor::scalar(1.0));
    CHECK(q.value.item() == doctest::Approx(-0.1 - 0.19));
}

TEST_CASE("SGD on a quadratic bowl decreases the loss monotonically") {
    Sgd sgd(0.05, 0.5);
    Parameter w{"w", Tensor({3}, {2.0, -1.0, 0.5})};
    double prev = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 10; ++step) {
        Tape tape;
        ForwardContext ctx(tape, Mode::train);
        Var v = ctx.bind(w);
        Var loss = sum(mul(v, v));
        CHECK(loss.value().item() < prev);
        prev = loss.value().item();
        sgd.step(ctx, tape.backward(loss));
    }
}

TEST_CASE("SGD rejects non-finite gradients naming the parameter") {
    Sgd sgd(0.1, 0.9);
    Parameter p{"block0.conv1", Tensor({2}, {1.0, 2.0})};
    try {
        sgd.step(p, Tensor({2}, {1.0, std::nan("")}));
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("block0.conv1") != std::string::npos);
    }
    CHECK(p.value == Tensor({2}, {1.0, 2.0}));
    CHECK_THROWS_AS(sgd.step(p, Tensor({3}, {0, 0, 0})), ShapeError);
    CHECK_THROWS_AS(Sgd(0.0, 0.5), ConfigError);
    CHECK_THROWS_AS(Sgd(0.1, 1.0), ConfigError);
}
