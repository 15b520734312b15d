#include <benchmark/benchmark.h>

#include <random>

#include "nam/ops.hpp"

using namespace nam;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    std::vector<double> v(element_count(shape));
    for (auto& x : v) x = d(rng);
    return Tensor(std::move(shape), std::move(v));
}

void BM_Conv2dForwardBackward(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    const Tensor x = random_tensor({64, c, 14, 14}, 1);
    const Tensor w = random_tensor({2 * c, c, 3, 3}, 2);
    for (auto _ : state) {
        Tape tape;
        Var xv = tape.variable(x), wv = tape.variable(w);
        Var y = conv2d(xv, wv, std::nullopt, {.stride = 2, .padding = 1});
        auto grads = tape.backward(sum(y));
        benchmark::DoNotOptimize(grads.grad(wv));
    }
}
BENCHMARK(BM_Conv2dForwardBackward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Dense(benchmark::State& state) {
    const Tensor x = random_tensor({256, 128}, 3);
    const Tensor w = random_tensor({128, 10}, 4);
    for (auto _ : state) {
        Tape tape;
        benchmark::DoNotOptimize(dense(tape.constant(x), tape.constant(w), std::nullopt).value());
    }
}
BENCHMARK(BM_Dense);

} // namespace
