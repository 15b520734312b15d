#include <benchmark/benchmark.h>

#include <random>

#include "nam/attention.hpp"
#include "nam/baselines.hpp"
#include "nam/ops.hpp"

using namespace nam;

namespace {

Tensor random_input(std::size_t c, std::size_t hw) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> d;
    std::vector<double> v(64 * c * hw * hw);
    for (auto& x : v) x = d(rng);
    return Tensor({64, c, hw, hw}, std::move(v));
}

void BM_NamForwardBackward(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    const auto hw = static_cast<std::size_t>(state.range(1));
    const Tensor x = random_input(c, hw);
    NamModule nam({}, c, hw, hw, "nam");
    for (auto _ : state) {
        Tape tape;
        ForwardContext ctx(tape, Mode::train);
        Var in = tape.variable(x);
        auto grads = tape.backward(sum(nam.forward(ctx, in)));
        benchmark::DoNotOptimize(grads.grad(in));
    }
}
BENCHMARK(BM_NamForwardBackward)->Args({16, 14})->Args({64, 4})->Unit(benchmark::kMillisecond);

void BM_SeForwardBackward(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    const auto hw = static_cast<std::size_t>(state.range(1));
    const Tensor x = random_input(c, hw);
    SeChannelAttention se(c, 4);
    std::mt19937_64 rng(8);
    se.initialize(rng);
    for (auto _ : state) {
        Tape tape;
        ForwardContext ctx(tape, Mode::train);
        Var in = tape.variable(x);
        auto grads = tape.backward(sum(se_forward(ctx, in, se)));
        benchmark::DoNotOptimize(grads.grad(in));
    }
}
BENCHMARK(BM_SeForwardBackward)->Args({16, 14})->Args({64, 4})->Unit(benchmark::kMillisecond);

} // namespace
