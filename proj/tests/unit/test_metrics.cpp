#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "nam/error.hpp"
#include "nam/metrics.hpp"
#include "nam/trainer.hpp"

using namespace nam;

namespace {

std::vector<MetricsRow> sample_rows() {
    MetricsRow a{1, 2.302585092994046, 0.0, 87.5, 42.25, 123.456, 7.0, 0.0};
    MetricsRow b{2, 0.1 + 0.2, 1e-3 * 384.9, 1.85, std::nullopt, 384.9, 1e-17, 0.125};
    return {a, b};
}

} // namespace

TEST_CASE("metrics CSV round-trips exactly") {
    const auto rows = sample_rows();
    const std::string csv = metrics_to_csv(rows, 0.01);
    CHECK(csv.rfind("# tau=0.01\nepoch,train_loss,penalty,top1_error,top5_error,", 0) == 0);
    CHECK(metrics_from_csv(csv) == rows);
    // Missing top5 is an empty field.
    CHECK(csv.find("\n2,0.30000000000000004,") != std::string::npos);
    CHECK(csv.find(",1.85,,384.9,") != std::string::npos);
    CHECK_THROWS_AS(metrics_from_csv("epoch,loss\n1,2\n"), DataError);
}

TEST_CASE("metrics JSON round-trips with a null top5") {
    const auto rows = sample_rows();
    const std::string json = metrics_to_json(rows);
    CHECK(json.find("\"top5_error\": null") != std::string::npos);
    CHECK(metrics_from_json(json) == rows);
    CHECK_THROWS_AS(metrics_from_json("[{\"epoch\": 1}]"), DataError);
}

TEST_CASE("format_double is shortest round-trip") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(std::stod(format_double(M_PI)) == M_PI);
}

TEST_CASE("top-k of a perfect classifier") {
    const Tensor logits({3, 6}, {9, 0, 0, 0, 0, 0, 0, 0, 5, 1, 0, 0, 0, 0, 0, 0, 0, 2});
    const std::vector<int> y{0, 2, 5};
    CHECK(top_k_correct(logits, y, 1) == 3);
    CHECK(top_k_correct(logits, y, 5) == 3);
}

TEST_CASE("top-k ties go to the lower class index") {
    const Tensor logits({1, 6}, {1, 1, 1, 1, 1, 1});
    CHECK(top_k_correct(logits, std::vector<int>{0}, 1) == 1);
    CHECK(top_k_correct(logits, std::vector<int>{1}, 1) == 0);
    CHECK(top_k_correct(logits, std::vector<int>{4}, 5) == 1);
    CHECK(top_k_correct(logits, std::vector<int>{5}, 5) == 0);
    CHECK_THROWS_AS(top_k_correct(logits, std::vector<int>{6}, 1), ConfigError);
    CHECK_THROWS_AS(top_k_correct(logits, std::vector<int>{0, 1}, 1), ShapeError);
}

TEST_CASE("top-k of random logits matches chance") {
    std::mt19937_64 rng(71);
    const std::size_t n = 2000;
    const Tensor logits = test::random_tensor({n, 10}, rng);
    std::vector<int> y(n);
    std::uniform_int_distribution<int> d(0, 9);
    for (auto& v : y) v = d(rng);
    const double top1 = 100.0 * static_cast<double>(n - top_k_correct(logits, y, 1)) / n;
    const double top5 = 100.0 * static_cast<double>(n - top_k_correct(logits, y, 5)) / n;
    CHECK(std::abs(top1 - 90.0) < 3.0);
    CHECK(std::abs(top5 - 50.0) < 3.0);
    CHECK(top5 <= top1);
}

TEST_CASE("evaluate rejects an empty dataset") {
    Network net(desk_scale_cnn(AttentionKind::none, {4}, 1, 8, 8, 10), 1);
    Dataset empty;
    empty.height = 8;
    empty.width = 8;
    empty.num_classes = 10;
    CHECK_THROWS_AS(evaluate(net, empty), DataError);
}
