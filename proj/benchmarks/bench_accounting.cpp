#include <benchmark/benchmark.h>

#include "nam/accounting.hpp"

using namespace nam;

namespace {

void BM_CountReport(benchmark::State& state) {
    const auto dims = resnet50_block_dims();
    for (auto _ : state) {
        benchmark::DoNotOptimize(count_report(dims, CountAttention::cbam_channel).total_params);
        benchmark::DoNotOptimize(count_report(dims, CountAttention::nam).total_params);
    }
}
BENCHMARK(BM_CountReport);

} // namespace
