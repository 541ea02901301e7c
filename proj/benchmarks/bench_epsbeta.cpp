#include <benchmark/benchmark.h>

#include "epsbeta/epsbeta.hpp"

using namespace epsbeta;

namespace {

void BM_Measure(benchmark::State& state) {
  const GridCluster E = fixtures::disk_cells(static_cast<int>(state.range(0)),
                                             0.4 * static_cast<double>(state.range(0)));
  const DensityField g = direction_weighted(0.3, Point{0.6, 0.8, 0});
  for (auto _ : state) benchmark::DoNotOptimize(measure(E, g).perimeter);
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(E.cell_count()));
}
BENCHMARK(BM_Measure)->Arg(64)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_PlanSurgery(benchmark::State& state) {
  const GridCluster E = fixtures::flat_interface(static_cast<int>(state.range(0)));
  const DensityField g = constant_density();
  for (auto _ : state) benchmark::DoNotOptimize(plan_surgery(E, g, 1, 2).eps_bar);
}
BENCHMARK(BM_PlanSurgery)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_TransferVolume(benchmark::State& state) {
  const GridCluster E = fixtures::flat_interface(static_cast<int>(state.range(0)));
  const DensityField g = constant_density();
  const SurgeryPlan plan = plan_surgery(E, g, 1, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(transfer_volume(E, g, plan, 0.25 * plan.eps_bar).after.perimeter);
}
BENCHMARK(BM_TransferVolume)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_AdjustSingleChamber(benchmark::State& state) {
  const GridCluster E = fixtures::nested_annuli();
  const DensityField g = constant_density();
  for (auto _ : state)
    benchmark::DoNotOptimize(adjust_single_chamber(E, g, 1, 1e-8).second.increment);
}
BENCHMARK(BM_AdjustSingleChamber)->Unit(benchmark::kMillisecond);

void BM_Infiltrate(benchmark::State& state) {
  const auto inc = fixtures::inclusions();
  const DensityField g = constant_density();
  const Point x{0.5, 0.5, 0.0};
  for (auto _ : state)
    for (const auto& f : inc)
      benchmark::DoNotOptimize(infiltrate(f.cluster, g, x, 1, 2, 0.25).second.perimeter_drop);
}
BENCHMARK(BM_Infiltrate)->Unit(benchmark::kMillisecond);

void BM_RadiusSearch(benchmark::State& state) {
  const auto inc = fixtures::inclusions();
  const Point x{0.5, 0.5, 0.0};
  for (auto _ : state)
    benchmark::DoNotOptimize(density_zero_radius_trace(inc.front().cluster, x, 1, 2, 10.0).radius);
}
BENCHMARK(BM_RadiusSearch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
