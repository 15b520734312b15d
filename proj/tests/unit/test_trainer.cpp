#include <cmath>

#include "doctest.h"
#include "nam/error.hpp"
#include "nam/synthetic_digits.hpp"
#include "nam/trainer.hpp"

using namespace nam;

namespace {

DataSplits tiny_data() {
    DataSplits d;
    d.train = synthetic_digits(96, 11);
    d.test = synthetic_digits(40, 12);
    return d;
}

TrainConfig tiny_config() {
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 16;
    cfg.widths = {4, 8};
    cfg.penalty.p = 1e-3;
    return cfg;
}

} // namespace

TEST_CASE("training is bit-reproducible for a fixed seed") {
    const auto data = tiny_data();
    const auto cfg = tiny_config();
    auto run = [&](std::uint64_t seed) {
        auto c = cfg;
        c.seed = seed;
        Network net(model_for(c, 1, 28, 28, 10), c.seed);
        return train(net, c, data);
    };
    const auto a = run(3), b = run(3), c = run(4);
    REQUIRE(a.size() == 2);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(a[0].epoch == 1);
    CHECK(a[1].epoch == 2);
    CHECK(a[0].top5_error.has_value());
    CHECK(a[1].penalty == doctest::Approx(1e-3 * (a[1].sum_abs_gamma + a[1].sum_abs_lambda)));
}

TEST_CASE("zero epochs yields no rows") {
    const auto data = tiny_data();
    auto cfg = tiny_config();
    cfg.epochs = 0;
    Network net(model_for(cfg, 1, 28, 28, 10), 1);
    CHECK(train(net, cfg, data).empty());
}

TEST_CASE("batch loss falls during training") {
    DataSplits data;
    data.train = synthetic_digits(256, 21);
    auto cfg = tiny_config();
    cfg.epochs = 3;
    cfg.penalty.p = 0.0;
    Network net(model_for(cfg, 1, 28, 28, 10), 2);
    std::vector<double> losses;
    TrainHooks hooks;
    hooks.on_step = [&](std::size_t, double l) { losses.push_back(l); };
    const auto rows = train(net, cfg, data, hooks);
    REQUIRE(losses.size() == 3 * 16);
    double first = 0, last = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        first += losses[i];
        last += losses[losses.size() - 1 - i];
    }
    CHECK(last < first);
    CHECK(rows.back().train_loss < rows.front().train_loss);
    CHECK(std::abs(losses.front() - std::log(10.0)) < 1.0);
}

TEST_CASE("training rejects empty or mismatched data") {
    auto cfg = tiny_config();
    Network net(model_for(cfg, 1, 28, 28, 10), 1);
    DataSplits empty;
    empty.train.height = 28;
    empty.train.width = 28;
    CHECK_THROWS_AS(train(net, cfg, empty), DataError);

    DataSplits small;
    small.train = synthetic_digits(8, 1, {.size = 14});
    CHECK_THROWS_AS(train(net, cfg, small), ShapeError);

    cfg.batch_size = 1;
    CHECK_THROWS_AS(train(net, cfg, tiny_data()), ConfigError);
}

TEST_CASE("model_for attaches the configured attention") {
    auto cfg = tiny_config();
    cfg.attention = AttentionKind::se;
    cfg.reduction = 4;
    const auto spec = model_for(cfg, 3, 32, 32, 100);
    REQUIRE(spec.blocks.size() == 2);
    CHECK(spec.blocks[0].attention.kind == AttentionKind::se);
    CHECK(spec.num_classes == 100);
    CHECK(spec.input_channels == 3);
}
