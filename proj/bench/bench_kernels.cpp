// Serial vs OpenMP kernels. The range argument is the local capacity.

#include "fedadm/agents.hpp"
#include "fedadm/chain.hpp"
#include "fedadm/dp.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

using namespace fedadm;

namespace {

struct Fixture {
    StateSpace space;
    TransitionModel model;
    ActionTable dp;
    ValueTable values;
    SparseChain transposed;
    std::vector<double> pi;

    explicit Fixture(SystemConfig c)
        : space(StateSpace::enumerate(c)), model(space) {
        const auto solved = policy_iteration({}, model);
        dp = solved.actions;
        values = solved.values;
        transposed = transpose(induced_chain(dp, model));
        pi = exact_average_profit(dp, model).stationary.distribution;
    }
};

const Fixture& fixture(int local_capacity) {
    static std::map<int, std::unique_ptr<Fixture>> cache;
    auto& slot = cache[local_capacity];
    if (!slot) {
        SystemConfig c = default_config();
        c.local_capacity = local_capacity;
        slot = std::make_unique<Fixture>(c);
    }
    return *slot;
}

Backend backend_of(const benchmark::State& state) { return state.range(1) ? Backend::Parallel : Backend::Serial; }

void BM_StationarySweep(benchmark::State& state) {
    const Fixture& f = fixture(static_cast<int>(state.range(0)));
    std::vector<double> out(f.pi.size());
    for (auto _ : state) {
        benchmark::DoNotOptimize(stationary_sweep(f.transposed, f.pi, out, backend_of(state)));
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.space.size()));
}

void BM_PolicyImprovement(benchmark::State& state) {
    const Fixture& f = fixture(static_cast<int>(state.range(0)));
    DpParams params;
    params.backend = backend_of(state);
    for (auto _ : state) benchmark::DoNotOptimize(policy_improvement(f.values, f.dp, params, f.model));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.space.size()));
}

void BM_EvaluatePolicy(benchmark::State& state) {
    const Fixture& f = fixture(static_cast<int>(state.range(0)));
    const Policy policy = Policy::from_table(f.space, f.dp);
    const auto seeds = evaluation_seeds(1, 8);
    constexpr std::uint64_t demands = 20'000;
    for (auto _ : state)
        benchmark::DoNotOptimize(evaluate_policy(policy, f.space.config(), demands, seeds, backend_of(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(demands * seeds.size()));
}

void capacities(benchmark::internal::Benchmark* b) {
    for (int lc : {30, 120})
        for (int parallel : {0, 1}) b->Args({lc, parallel});
    b->ArgNames({"lc", "parallel"})->Unit(benchmark::kMillisecond);
}

} // namespace

BENCHMARK(BM_StationarySweep)->Apply(capacities);
BENCHMARK(BM_PolicyImprovement)->Apply(capacities);
BENCHMARK(BM_EvaluatePolicy)->Apply(capacities);

BENCHMARK_MAIN();
