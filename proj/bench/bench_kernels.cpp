// Serial reference vs OpenMP-parallel corpus kernels.

#include <benchmark/benchmark.h>

#include "defgraph/evaluation.hpp"
#include "defgraph/generators.hpp"
#include "defgraph/pipeline.hpp"

using namespace defgraph;

namespace {

std::vector<DefeasibleQuery> corpus(std::size_t n) {
    std::vector<DefeasibleQuery> out;
    for (std::size_t i = 0; i < n; ++i) {
        DefeasibleQuery q;
        q.id = "q" + std::to_string(i);
        q.premise = "premise number " + std::to_string(i);
        q.hypothesis = "the hypothesis holds";
        q.update = "an update arrives";
        q.label = i % 2 ? InferenceLabel::Weakener : InferenceLabel::Strengthener;
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<InfluenceGraph> graphs(std::size_t n) {
    const MockGenerator gen(5, 0.7);
    std::vector<InfluenceGraph> out;
    for (const auto& q : corpus(n)) out.push_back(gen.generate(q, Variant::M).graph);
    return out;
}

const OracleConfig kCfg{};

void BM_ReportSerial(benchmark::State& state) {
    const auto g = graphs(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(serial::repetition_report(g, kCfg, Domain::Atomic));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ReportParallel(benchmark::State& state) {
    const auto g = graphs(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(repetition_report(g, kCfg, Domain::Atomic));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PairsSerial(benchmark::State& state) {
    const auto q = corpus(static_cast<std::size_t>(state.range(0)));
    const MockGenerator m(1, 0.7), mstar(2, 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(serial::build_training_data(q, m, mstar, kCfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PairsParallel(benchmark::State& state) {
    const auto q = corpus(static_cast<std::size_t>(state.range(0)));
    const MockGenerator m(1, 0.7), mstar(2, 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(build_training_data(q, m, mstar, kCfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_RefineSerial(benchmark::State& state) {
    const auto q = corpus(static_cast<std::size_t>(state.range(0)));
    const MockGenerator gen(1, 1.0);
    const RepairCorrector repair;
    for (auto _ : state) benchmark::DoNotOptimize(serial::refine_corpus(q, gen, repair, kCfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_RefineParallel(benchmark::State& state) {
    const auto q = corpus(static_cast<std::size_t>(state.range(0)));
    const MockGenerator gen(1, 1.0);
    const RepairCorrector repair;
    for (auto _ : state) benchmark::DoNotOptimize(refine_corpus(q, gen, repair, kCfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ReportSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_ReportParallel)->Arg(1000)->Arg(10000);
BENCHMARK(BM_PairsSerial)->Arg(1000);
BENCHMARK(BM_PairsParallel)->Arg(1000);
BENCHMARK(BM_RefineSerial)->Arg(1000);
BENCHMARK(BM_RefineParallel)->Arg(1000);

BENCHMARK_MAIN();
