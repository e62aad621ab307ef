// Parallel kernels vs their serial reference implementations.

#include <benchmark/benchmark.h>

#include <random>

#include "nlos/phasor.hpp"
#include "nlos/render.hpp"
#include "nlos/rsd.hpp"
#include "nlos/spad_noise.hpp"

using namespace nlos;

namespace {

Scene bench_scene() {
  std::mt19937_64 rng(7);
  return sample_scene(rng, BaseShape::SphereShell, AugmentParams::validation());
}

const ScanGrid& bench_grid() {
  static const ScanGrid grid = make_scan_grid(2.0, 2.0, 32, 32, true);
  return grid;
}

void BM_RenderParallel(benchmark::State& state) {
  const Scene scene = bench_scene();
  for (auto _ : state) benchmark::DoNotOptimize(render_confocal(scene, bench_grid(), 512, 32.0));
}

void BM_RenderReference(benchmark::State& state) {
  const Scene scene = bench_scene();
  for (auto _ : state) benchmark::DoNotOptimize(reference::render_confocal(scene, bench_grid(), 512, 32.0));
}

void BM_JitterParallel(benchmark::State& state) {
  const auto volume = render_confocal(bench_scene(), bench_grid(), 512, 32.0);
  for (auto _ : state) benchmark::DoNotOptimize(apply_jitter(volume, 64.0));
}

void BM_JitterReference(benchmark::State& state) {
  const auto volume = render_confocal(bench_scene(), bench_grid(), 512, 32.0);
  for (auto _ : state) benchmark::DoNotOptimize(reference::apply_jitter(volume, 64.0));
}

struct PropagationCase {
  PhasorField field;
  PropagationPlan plan;
};

PropagationCase make_case(int nx, int nz) {
  const ScanGrid grid = make_scan_grid(2.0, 2.0, nx, nx, true);
  const auto volume = render_confocal(bench_scene(), grid, 512, 32.0);
  const auto packet = illumination_packet(3.0 * grid.delta_p_m, reference_calibration().n_cycles, 512, 32.0);
  PropagationCase c{aperture_field(spectrum(volume), packet), make_plan(grid, 0.0, 2.0, nz, true)};
  c.plan.warm_cache(c.field.axis, c.field.band);
  return c;
}

void BM_PropagateParallel(benchmark::State& state) {
  const auto c = make_case(static_cast<int>(state.range(0)), 16);
  for (auto _ : state) benchmark::DoNotOptimize(propagate(c.field, c.plan, Execution::Parallel));
}

void BM_PropagateSerial(benchmark::State& state) {
  const auto c = make_case(static_cast<int>(state.range(0)), 16);
  for (auto _ : state) benchmark::DoNotOptimize(propagate(c.field, c.plan, Execution::Serial));
}

void BM_PropagateDirect(benchmark::State& state) {
  const auto c = make_case(static_cast<int>(state.range(0)), 16);
  for (auto _ : state) benchmark::DoNotOptimize(propagate_direct(c.field, c.plan));
}

}  // namespace

BENCHMARK(BM_RenderParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JitterParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JitterReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PropagateParallel)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PropagateSerial)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PropagateDirect)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
