#include "omx/presets.hpp"
#include "omx/pulsed.hpp"
#include "omx/spectra.hpp"
#include "omx/units.hpp"

#include <benchmark/benchmark.h>

#include <omp.h>

namespace {

omx::PulseTrain bench_train(std::uint64_t pulses)
{
    omx::PulseTrain train;
    train.n_pulses = pulses;
    return train;
}

void BM_SimulateClicksSerial(benchmark::State& state)
{
    const auto device = omx::device_preset("B");
    const auto train = bench_train(static_cast<std::uint64_t>(state.range(0)));
    const omx::HeatingKernel kernel{0.0298, 4.5e-6, 0.0};
    for (auto _ : state) {
        auto sim = omx::simulate_clicks_serial(device, train, {}, kernel, 33.9, 7);
        benchmark::DoNotOptimize(sim.clicks.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SimulateClicksParallel(benchmark::State& state)
{
    const auto device = omx::device_preset("B");
    const auto train = bench_train(static_cast<std::uint64_t>(state.range(0)));
    const omx::HeatingKernel kernel{0.0298, 4.5e-6, 0.0};
    for (auto _ : state) {
        auto sim = omx::simulate_clicks(device, train, {}, kernel, 33.9, 7, static_cast<int>(state.range(1)));
        benchmark::DoNotOptimize(sim.clicks.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

struct MapGrid {
    std::vector<double> detunings;
    std::vector<double> probe;
};

MapGrid map_grid(const omx::Device& device, std::size_t n)
{
    const double wm = device.mechanical().omega_m();
    const double k = device.optical().kappa();
    return {omx::linspace(-wm - k, -wm + k, n), omx::linspace(wm - 1.5 * k, wm + 1.5 * k, n)};
}

void BM_OmitMapSerial(benchmark::State& state)
{
    const auto device = omx::device_preset("A");
    const auto grid = map_grid(device, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto mag = omx::omit_map_serial(device, 8e4, grid.detunings, grid.probe);
        benchmark::DoNotOptimize(mag.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_OmitMapParallel(benchmark::State& state)
{
    const auto device = omx::device_preset("A");
    const auto grid = map_grid(device, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto mag = omx::omit_map(device, 8e4, grid.detunings, grid.probe, static_cast<int>(state.range(1)));
        benchmark::DoNotOptimize(mag.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void thread_args(benchmark::internal::Benchmark* b, int64_t size)
{
    for (int t = 1; t <= omp_get_max_threads(); t *= 2) b->Args({size, t});
}

} // namespace

BENCHMARK(BM_SimulateClicksSerial)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateClicksParallel)->Apply([](auto* b) { thread_args(b, 1 << 18); })->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OmitMapSerial)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OmitMapParallel)->Apply([](auto* b) { thread_args(b, 400); })->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
