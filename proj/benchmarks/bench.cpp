// Timings of the main pipeline stages on the Nikitin model (b=1, de=2).

#include "adiabat/oracle.hpp"

#include <benchmark/benchmark.h>

using namespace adiabat;

namespace {

struct Nikitin {
    FieldProfile field = FieldProfile::nikitin(1, 2, 1);
    EffectivePotential ep{field};
    Box box = default_search_box(ep);
    StokesGraph graph = build_graph(ep, box);
    NedChain chain = identify_ned_chain(graph);
    ChainGeometry geo = chain_geometry(ep, graph, chain);
};

const Nikitin& nikitin()
{
    static const Nikitin n;
    return n;
}

void BM_q2(benchmark::State& state)
{
    const auto& ep = nikitin().ep;
    cplx s(0.3, 0.2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ep.eval_q2(s, 20.0));
        s += cplx(1e-9, 0);
    }
}
BENCHMARK(BM_q2);

void BM_turning_points(benchmark::State& state)
{
    const auto& n = nikitin();
    for (auto _ : state) benchmark::DoNotOptimize(find_turning_points(n.ep, n.box));
}
BENCHMARK(BM_turning_points)->Unit(benchmark::kMillisecond);

void BM_graph(benchmark::State& state)
{
    const auto& n = nikitin();
    GraphOptions o;
    o.anti_stokes = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(build_graph(n.ep, n.box, o));
}
BENCHMARK(BM_graph)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_chain_geometry(benchmark::State& state)
{
    const auto& n = nikitin();
    for (auto _ : state) benchmark::DoNotOptimize(chain_geometry(n.ep, n.graph, n.chain));
}
BENCHMARK(BM_chain_geometry)->Unit(benchmark::kMillisecond);

void BM_adiabatic_amplitude(benchmark::State& state)
{
    const auto& n = nikitin();
    for (auto _ : state) benchmark::DoNotOptimize(adiabatic_amplitude(n.geo, 20.0));
}
BENCHMARK(BM_adiabatic_amplitude);

void BM_exact_leading(benchmark::State& state)
{
    const auto& n = nikitin();
    for (auto _ : state) benchmark::DoNotOptimize(exact_leading_amplitude(n.ep, n.geo, 20.0));
}
BENCHMARK(BM_exact_leading)->Unit(benchmark::kMillisecond);

void BM_oracle(benchmark::State& state)
{
    const auto& n = nikitin();
    double T = double(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(oracle_probability(n.field, T));
}
BENCHMARK(BM_oracle)->Arg(5)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
