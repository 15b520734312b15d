#include <algorithm>
#include <limits>
#include "doctest.h"
#include "helpers.hpp"
#include "nam/error.hpp"
#include "nam/grad_check.hpp"
#include "nam/gradcheck_suite.hpp"
#include "nam/ops.hpp"

using namespace nam;

TEST_CASE("relative error definition") {
    CHECK(relative_error(1.0, 1.0) == 0.0);
    CHECK(relative_error(1.0, 3.0) == doctest::Approx(0.5));
    // Denominator floor of 1e-8.
    CHECK(relative_error(1e-12, 0.0) == doctest::Approx(1e-4));
}

TEST_CASE("grad_check of sum is exact up to roundoff") {
    std::mt19937_64 rng(1);
    CHECK(grad_check([](Var x) { return sum(x); }, test::random_tensor({3, 4}, rng), 1e-5) < 1e-9);
}

TEST_CASE("grad_check of sum of squares") {
    const Tensor x({3}, {1.0, 2.0, 3.0});
    const ScalarFunction f = [](Var v) { return sum(mul(v, v)); };
    Tape tape;
    Var xv = tape.variable(x);
    const Tensor g = tape.backward(f(xv)).grad(xv);
    CHECK(g == Tensor({3}, {2.0, 4.0, 6.0}));
    CHECK(grad_check(f, x, 1e-5) < 1e-8);
}

TEST_CASE("grad_check detects a wrong gradient") {
    // A custom op whose backward is off by a factor of two.
    const ScalarFunction f = [](Var x) {
        Tape& tape = *x.tape;
        Var y = tape.record("bad_square", Tensor::scalar(x.value().item() * x.value().item()), {x},
                            [x](std::span<const double> g, std::span<double* const> in) {
                                if (in[0]) in[0][0] += g[0] * 4.0 * x.value().item();
                            });
        return y;
    };
    CHECK(grad_check(f, Tensor::scalar(1.5), 1e-5) > 0.3);
}

TEST_CASE("numeric gradient rejects a non-positive step") {
    CHECK_THROWS_AS(numeric_gradient([](Var x) { return sum(x); }, Tensor::scalar(1.0), 0.0), ConfigError);
}

TEST_CASE("operator suite passes at eps 1e-5 over 20 seeds") {
    for (const auto& op : gradcheck_ops()) {
        for (std::uint64_t seed = 100; seed < 120; ++seed) {
            CAPTURE(op);
            CAPTURE(seed);
            CHECK(run_gradcheck(op, seed, 1e-5) < 1e-5);
        }
    }
}

TEST_CASE("operator suite lists every required op and rejects unknown names") {
    const auto& ops = gradcheck_ops();
    for (const char* name : {"conv2d", "dense", "sigmoid", "relu", "global_avg_pool", "batch_norm", "pixel_norm",
                             "normalized_weights", "nam_channel", "nam_spatial", "nam", "se", "total_loss"}) {
        CAPTURE(name);
        CHECK(std::find(ops.begin(), ops.end(), name) != ops.end());
    }
    CHECK_THROWS_AS(run_gradcheck("no_such_op", 0), ConfigError);
}
