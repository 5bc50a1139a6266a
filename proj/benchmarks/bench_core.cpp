#include <benchmark/benchmark.h>

#include "hesrpt/optimal.hpp"
#include "hesrpt/policies.hpp"
#include "hesrpt/simulator.hpp"
#include "hesrpt/workload.hpp"

#include <vector>

using namespace hesrpt;

namespace {

std::vector<Job> batch_of(int m, std::uint64_t seed) {
    WorkloadSpec spec;
    spec.m_jobs = m;
    spec.size_dist = SizeDist::pareto(1.5);
    spec.arrivals = ArrivalProcess::batch();
    spec.seed = seed;
    return generate(spec, SpeedupParams(0.5, 1e6));
}

PolicyState state_of(int m) {
    std::vector<ActiveJob> active;
    auto jobs = batch_of(m, 5);
    for (const Job& j : jobs) active.push_back({j.id, j.size, j.size, 0.0});
    return PolicyState{std::move(active), SpeedupParams(0.5, 1e6),
                       WeightKind::Slowdown, 1000, 0.01};
}

void BM_AllocationFractions(benchmark::State& state) {
    std::vector<double> weights(state.range(0));
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = 1.0 + 0.001 * i;
    for (auto _ : state) {
        auto theta = allocation_fractions(weights, 0.5);
        benchmark::DoNotOptimize(theta.data());
    }
    state.SetComplexityN(state.range(0));
}

void BM_OfflineSchedule(benchmark::State& state) {
    auto jobs = batch_of(static_cast<int>(state.range(0)), 3);
    SpeedupParams params(0.5, 1e6);
    Instance inst(jobs, params, WeightScheme::slowdown(jobs, params));
    for (auto _ : state) {
        OfflineSchedule sched = offline_schedule(inst);
        benchmark::DoNotOptimize(sched.phases.data());
    }
    state.SetComplexityN(state.range(0));
}

void BM_SimulateBatch(benchmark::State& state) {
    auto jobs = batch_of(static_cast<int>(state.range(0)), 4);
    SpeedupParams params(0.5, 1e6);
    WeightScheme weights = WeightScheme::slowdown(jobs, params);
    auto policy = make_policy("hesrpt");
    for (auto _ : state) {
        SimResult r = simulate(jobs, *policy, params, weights);
        benchmark::DoNotOptimize(r.mean_slowdown);
    }
    state.SetComplexityN(state.range(0));
}

void BM_HellDecide(benchmark::State& state) {
    PolicyState st = state_of(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        AllocationVector v = hell_decide(st);
        benchmark::DoNotOptimize(v.entries().data());
    }
}

void BM_KneeDecide(benchmark::State& state) {
    PolicyState st = state_of(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        AllocationVector v = knee_decide(st);
        benchmark::DoNotOptimize(v.entries().data());
    }
}

void BM_GeneratePareto(benchmark::State& state) {
    WorkloadSpec spec;
    spec.m_jobs = static_cast<int>(state.range(0));
    spec.size_dist = SizeDist::pareto(0.8);
    spec.arrivals = ArrivalProcess::batch();
    spec.seed = 11;
    SpeedupParams params(0.5, 1e6);
    for (auto _ : state) {
        auto jobs = generate(spec, params);
        benchmark::DoNotOptimize(jobs.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_AllocationFractions)->RangeMultiplier(4)->Range(8, 2048)->Complexity();
BENCHMARK(BM_OfflineSchedule)->RangeMultiplier(4)->Range(8, 512)->Complexity();
BENCHMARK(BM_SimulateBatch)->RangeMultiplier(4)->Range(8, 512)->Complexity();
BENCHMARK(BM_HellDecide)->Arg(16)->Arg(128)->Arg(512);
BENCHMARK(BM_KneeDecide)->Arg(16)->Arg(128)->Arg(512);
BENCHMARK(BM_GeneratePareto)->Arg(1000)->Arg(100000);

BENCHMARK_MAIN();
