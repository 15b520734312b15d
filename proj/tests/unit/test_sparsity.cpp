#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "nam/error.hpp"
#include "nam/network.hpp"
#include "nam/sparsity.hpp"

using namespace nam;

TEST_CASE("equal scales have maximal entropy and nothing below tau") {
    const auto s = scale_stats(Tensor({8}, {0.5, -0.5, 0.5, 0.5, -0.5, 0.5, 0.5, 0.5}), 0.01);
    CHECK(s.count == 8);
    CHECK(s.sum_abs == 4.0);
    CHECK(s.fraction_below == 0.0);
    CHECK(s.entropy == doctest::Approx(std::log(8.0)).epsilon(1e-14));
}

TEST_CASE("one-hot scales have zero entropy") {
    const auto s = scale_stats(Tensor({4}, {0.0, 3.0, 0.0, 0.0}), 0.01);
    CHECK(s.entropy == 0.0);
    CHECK(s.fraction_below == 0.75);
    const auto zero = scale_stats(Tensor({2}, {0.0, 0.0}), 0.01);
    CHECK(zero.entropy == 0.0);
    CHECK(zero.fraction_below == 1.0);
    CHECK_THROWS_AS(scale_stats(Tensor({1}, {1.0}), 0.0), ConfigError);
}

TEST_CASE("network report aggregates its modules") {
    Network net(desk_scale_cnn(AttentionKind::nam, {4, 6}, 1, 8, 8, 10), 2);
    auto groups = net.nam_scales();
    // Zero out half of the first gamma.
    groups[0].parameter->value = Tensor({4}, {0.0, 0.005, 1.0, -2.0});
    const auto r = sparsity_report(net, 0.01);
    REQUIRE(r.modules.size() == 4);
    double gamma = 0, lambda = 0, entropy = 0;
    std::size_t below = 0, total = 0;
    for (const auto& g : groups) {
        for (double v : g.parameter->value.data()) {
            (g.kind == ScaleGroup::Kind::spatial ? lambda : gamma) += std::abs(v);
            below += std::abs(v) < 0.01;
            ++total;
        }
        entropy += scale_stats(g.parameter->value, 0.01).entropy;
    }
    CHECK(r.sum_abs_gamma == doctest::Approx(gamma));
    CHECK(r.sum_abs_lambda == doctest::Approx(lambda));
    CHECK(r.fraction_below == doctest::Approx(static_cast<double>(below) / total));
    CHECK(r.total_entropy == doctest::Approx(entropy));
    CHECK(below == 2);

    const auto j = nlohmann::json::parse(to_json(r));
    CHECK(j["modules"].size() == 4);
    CHECK(j["tau"] == 0.01);
}
