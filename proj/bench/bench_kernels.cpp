// Serial reference vs OpenMP for the two replicate-parallel kernels.
// The Arg is the worker count; 1 runs the serial path.

#include <benchmark/benchmark.h>

#include <vector>

#include "itosim/convergence.hpp"
#include "itosim/experiments.hpp"
#include "itosim/models.hpp"
#include "itosim/schemes.hpp"

namespace {

using namespace itosim;

Execution exec_for(int workers) { return workers <= 1 ? Execution::Serial : Execution::OpenMP; }

void BM_SubdivisionMse(benchmark::State& state) {
    const int workers = static_cast<int>(state.range(0));
    const experiments::RunOptions opts{1, 1000, exec_for(workers), workers};
    for (auto _ : state) {
        const auto r = experiments::subdivision_mse(0.0625, {8, 16, 32}, 4096, opts);
        benchmark::DoNotOptimize(r.em_ic0.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(opts.samples));
}

void BM_HestonTerminals(benchmark::State& state) {
    const int workers = static_cast<int>(state.range(0));
    StudyConfig cfg;
    cfg.base_delta = 0.125;
    cfg.levels = 3;
    cfg.replicates = 200;
    cfg.channels = 2;
    cfg.exec = exec_for(workers);
    cfg.workers = workers;
    const HestonParams p;
    const TerminalSolver solver = [&p](const LevelNoise& n) {
        const iterint::DoubleIntegralMethod method{iterint::MethodKind::MilsteinL0, n.sub->steps() / n.steps.steps()};
        const PathResult r = heston_milstein_2d(p, n.steps, method, n.sub, n.seeds);
        return std::vector<double>(r.terminal().begin(), r.terminal().end());
    };
    for (auto _ : state) {
        const TerminalSample s = simulate_terminals(solver, cfg, SubdivisionRule::per_delta(1.0), nullptr);
        benchmark::DoNotOptimize(s.values.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(cfg.replicates));
}

}  // namespace

BENCHMARK(BM_SubdivisionMse)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_HestonTerminals)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
