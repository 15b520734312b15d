#include "doctest.h"
#include "nam/config.hpp"
#include "nam/error.hpp"

using namespace nam;

namespace {

std::string error_of(std::string_view text) {
    try {
        parse_train_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("train config parses every key") {
    const auto cfg = parse_train_config(R"(
# desk run
seed = 7
epochs = 3
batch_size = 32      # small
learning_rate = 0.1
momentum = 0.5
lr_step_epochs = 0
lr_decay = 0.5
penalty = 1e-3
penalty_channel = false
penalty_spatial = true
penalty_backbone = true
data = /tmp/mnist
format = cifar
attention = nam-sp
widths = 8, 16
reduction = 4
tau = 0.05
train_limit = 100
test_limit = 50
out = runs/a
)");
    CHECK(cfg.seed == 7);
    CHECK(cfg.epochs == 3);
    CHECK(cfg.batch_size == 32);
    CHECK(cfg.learning_rate == 0.1);
    CHECK(cfg.momentum == 0.5);
    CHECK(cfg.lr_step_epochs == 0);
    CHECK(cfg.lr_decay == 0.5);
    CHECK(cfg.penalty.p == 1e-3);
    CHECK_FALSE(cfg.penalty.include_channel);
    CHECK(cfg.penalty.include_spatial);
    CHECK(cfg.penalty.include_backbone);
    CHECK(cfg.data == "/tmp/mnist");
    CHECK(cfg.format == DataFormat::cifar);
    CHECK(cfg.attention == AttentionKind::nam_spatial);
    CHECK(cfg.widths == std::vector<std::size_t>{8, 16});
    CHECK(cfg.reduction == 4);
    CHECK(cfg.tau == 0.05);
    CHECK(cfg.train_limit == 100);
    CHECK(cfg.test_limit == 50);
    CHECK(cfg.out == "runs/a");
}

TEST_CASE("defaults describe the desk protocol") {
    const TrainConfig cfg;
    CHECK(cfg.batch_size == 64);
    CHECK(cfg.learning_rate == 0.05);
    CHECK(cfg.momentum == 0.9);
    CHECK(cfg.penalty.p == 0.0);
    CHECK(cfg.attention == AttentionKind::nam);
    CHECK(cfg.widths == std::vector<std::size_t>{16, 32, 64, 128});
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config errors name the offending line") {
    CHECK(error_of("seed = 1\n\nbogus = 2\n").find("line 3: unknown key 'bogus'") != std::string::npos);
    CHECK(error_of("epochs = three").find("line 1") != std::string::npos);
    CHECK(error_of("just text").find("line 1: expected 'key = value'") != std::string::npos);
    CHECK(error_of("penalty_backbone = maybe").find("true or false") != std::string::npos);
    CHECK_THROWS_AS(parse_train_config("attention = cbam"), ConfigError);
}

TEST_CASE("validation rejects unusable values") {
    auto invalid = [](auto mutate) {
        TrainConfig cfg;
        mutate(cfg);
        try {
            cfg.validate();
        } catch (const ConfigError&) {
            return true;
        }
        return false;
    };
    CHECK(invalid([](TrainConfig& c) { c.batch_size = 1; }));
    CHECK(invalid([](TrainConfig& c) { c.penalty.p = -1e-4; }));
    CHECK(invalid([](TrainConfig& c) { c.momentum = 1.0; }));
    CHECK(invalid([](TrainConfig& c) { c.learning_rate = 0.0; }));
    CHECK(invalid([](TrainConfig& c) { c.widths.clear(); }));
    CHECK(invalid([](TrainConfig& c) { c.tau = 0.0; }));
    CHECK_FALSE(invalid([](TrainConfig& c) { c.batch_size = 2; }));
}

TEST_CASE("architecture config lists blocks") {
    const auto arch = parse_arch_config("block = 512 4 32 32\nblock = 64 4 4 4\nreduction = 8\nkernel = 3\n");
    REQUIRE(arch.blocks.size() == 2);
    CHECK(arch.blocks[0].channels() == 2048);
    CHECK(arch.blocks[0].height == 32);
    CHECK(arch.blocks[1].base_channels == 64);
    CHECK(arch.blocks[1].width == 4);
    CHECK(arch.options.reduction == 8);
    CHECK(arch.options.kernel == 3);
    CHECK_THROWS_AS(parse_arch_config("reduction = 16\n"), ConfigError);
    CHECK_THROWS_AS(parse_arch_config("block = 1 2 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_arch_config("blocks = 1 2 3 4\n"), ConfigError);
}
