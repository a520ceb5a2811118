// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <numbers>

#include "nfrm/aperture.hpp"
#include "nfrm/estimation.hpp"
#include "nfrm/pipeline.hpp"
#include "nfrm/scenario.hpp"

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const nfrm::ScenarioConfig& paper_room()
{
    static const auto cfg = nfrm::load_scenario("paper-room");
    return cfg;
}

void BM_SynthChannel(benchmark::State& state)
{
    const auto& cfg = paper_room();
    const auto truth = nfrm::scenario_truth(cfg);
    const auto plan = cfg.plan();
    const auto& pl = plan.placements.front();
    for (auto _ : state)
        benchmark::DoNotOptimize(
            nfrm::synth_channel(truth.paths, pl.tx_positions, pl.rx_positions, cfg.grid, plan.references()));
}
BENCHMARK(BM_SynthChannel);

void BM_ComputePdp(benchmark::State& state)
{
    const auto set = nfrm::simulate_scenario(paper_room());
    const auto tones = set.responses.front().tones(0, 0);
    for (auto _ : state)
        benchmark::DoNotOptimize(nfrm::compute_pdp(tones, set.grid, nfrm::Window::hann));
}
BENCHMARK(BM_ComputePdp);

void BM_AtomScore(benchmark::State& state)
{
    const auto set = nfrm::simulate_scenario(paper_room());
    for (auto _ : state)
        benchmark::DoNotOptimize(nfrm::atom_score(set, 50 * kDeg, -130 * kDeg, 26e-9));
}
BENCHMARK(BM_AtomScore);

// One OMP iteration over an AoA x AoD x delay dictionary of growing angular density.
void BM_OmpSingleIteration(benchmark::State& state)
{
    const auto set = nfrm::with_rx_reference(nfrm::simulate_scenario(paper_room()), {0.4, 0.0});
    const double step = static_cast<double>(state.range(0)) * kDeg;
    const nfrm::DictionaryGrid grid{nfrm::uniform_grid(0.0, 180 * kDeg, step),
                                    nfrm::uniform_grid(-180 * kDeg + step, 180 * kDeg, step),
                                    nfrm::delay_grid_from_pdp(set, 1e-9, 30.0)};
    for (auto _ : state)
        benchmark::DoNotOptimize(nfrm::omp_extract(set, grid, 1, 0.0));
    state.counters["atoms"] = static_cast<double>(grid.size());
}
BENCHMARK(BM_OmpSingleIteration)->Arg(8)->Arg(4)->Arg(2)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
