#include <benchmark/benchmark.h>

#include <map>

#include "bufsim/experiment.hpp"
#include "bufsim/metrics.hpp"
#include "bufsim/queue_sim.hpp"
#include "bufsim/synth.hpp"

namespace {

using namespace bufsim;

// Overloaded 1024 kb/s cell, the most event-heavy case in the default grid.
const Trace& workload(double duration_s)
{
    static std::map<double, Trace> cache;
    auto it = cache.find(duration_s);
    if (it == cache.end()) {
        ExperimentSpec spec;
        spec.duration_s = duration_s;
        it = cache.emplace(duration_s, build_cell_trace(spec, nullptr, 2048000, 1)).first;
    }
    return it->second;
}

void BM_Simulate(benchmark::State& state)
{
    const auto& trace = workload(static_cast<double>(state.range(0)));
    const auto policy = state.range(1) == 0 ? BufferPolicy::bytes(100000)
                                            : BufferPolicy::packets(270);
    for (auto _ : state) {
        auto r = simulate(trace, policy, LinkConfig{1024000});
        benchmark::DoNotOptimize(r.outcomes.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trace.size()));
}
BENCHMARK(BM_Simulate)->Args({60, 0})->Args({60, 1})->Args({600, 0})->Unit(benchmark::kMillisecond);

void BM_Oracle(benchmark::State& state)
{
    const auto& full = workload(60.0);
    const auto n = std::min<std::size_t>(full.size(), static_cast<std::size_t>(state.range(0)));
    const auto records = full.records().first(n);
    for (auto _ : state) {
        auto r = oracle_simulate(records, BufferPolicy::bytes(100000), LinkConfig{1024000});
        benchmark::DoNotOptimize(r.outcomes.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Oracle)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Summarize(benchmark::State& state)
{
    const auto r = simulate(workload(600.0), BufferPolicy::bytes(100000), LinkConfig{1024000});
    for (auto _ : state) {
        auto s = summarize(r, {30.0, 570.0});
        benchmark::DoNotOptimize(s.utilization);
    }
}
BENCHMARK(BM_Summarize)->Unit(benchmark::kMillisecond);

void BM_GenerateCell(benchmark::State& state)
{
    ExperimentSpec spec;
    spec.duration_s = 600.0;
    for (auto _ : state) {
        auto t = build_cell_trace(spec, nullptr, 1024000, 1);
        benchmark::DoNotOptimize(t.size());
    }
}
BENCHMARK(BM_GenerateCell)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
