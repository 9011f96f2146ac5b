#include <benchmark/benchmark.h>

#include "tbsim/analytic.hpp"
#include "tbsim/montecarlo.hpp"
#include "tbsim/reference.hpp"
#include "tbsim/timebin.hpp"

using namespace tbsim;

namespace {

// Bright, lossy point where the per-pulse reference is still tractable.
ExperimentConfig car_config()
{
    auto cfg = default_config();
    cfg.signal.channel_loss_db = 0.0;
    cfg.idler.channel_loss_db = 0.0;
    cfg.source.peak_power = pump_power_for_mu(0.01, cfg.source);
    cfg.pulse_count_unit = PulseCountUnit::pump_pulses;
    cfg.num_pulses = 2000000;
    return cfg;
}

void BM_car_reference(benchmark::State& state)
{
    const auto cfg = car_config();
    for (auto _ : state) benchmark::DoNotOptimize(simulate_car_run_reference(cfg));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.num_pulses));
}

void BM_car_event_driven(benchmark::State& state)
{
    const auto cfg = car_config();
    const RunOptions opt{static_cast<int>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(simulate_car_run(cfg, opt));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.num_pulses));
}

// Default operating point: a long run dominated by empty pulses.
void BM_car_operating_point(benchmark::State& state)
{
    auto cfg = default_config();
    cfg.num_pulses = 1000000;
    const RunOptions opt{static_cast<int>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(simulate_car_run(cfg, opt));
}

void BM_mzi_serial(benchmark::State& state)
{
    const auto st = entangled_state(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(apply_mzi_serial(apply_mzi_serial(st, Mode::signal, 0.3), Mode::idler, 0.0));
}

void BM_mzi_parallel(benchmark::State& state)
{
    const auto st = entangled_state(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(apply_mzi(apply_mzi(st, Mode::signal, 0.3), Mode::idler, 0.0));
}

}  // namespace

BENCHMARK(BM_car_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_car_event_driven)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_car_operating_point)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mzi_serial)->Arg(256)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mzi_parallel)->Arg(256)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
