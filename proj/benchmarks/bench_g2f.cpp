#include <benchmark/benchmark.h>

#include "g2f/fm_gauge.hpp"
#include "g2f/fueter.hpp"
#include "g2f/g2_core.hpp"
#include "g2f/models.hpp"
#include "g2f/pde.hpp"
#include "g2f/random.hpp"
#include "g2f/splitting.hpp"

using namespace g2f;

namespace {

void BM_Wedge(benchmark::State& state) {
  auto rng = sample_rng(1, 0);
  const Form a = gaussian_form(rng, 7, 3);
  const Form b = gaussian_form(rng, 7, 4);
  for (auto _ : state) benchmark::DoNotOptimize(wedge(a, b));
}
BENCHMARK(BM_Wedge);

void BM_Hodge(benchmark::State& state) {
  auto rng = sample_rng(2, 0);
  const Form a = gaussian_form(rng, 7, 3);
  for (auto _ : state) benchmark::DoNotOptimize(hodge(a));
}
BENCHMARK(BM_Hodge);

void BM_AssociatorResidual(benchmark::State& state) {
  const auto G = G2Structure::standard();
  auto rng = sample_rng(3, 0);
  const Mat V = gaussian_matrix(rng, 7, 3);
  for (auto _ : state) benchmark::DoNotOptimize(associator_residual(V.col(0), V.col(1), V.col(2), G));
}
BENCHMARK(BM_AssociatorResidual);

void BM_ConditionResiduals(benchmark::State& state) {
  const GraphPlane g = sample_fueter_plane(4, 0);
  for (auto _ : state) benchmark::DoNotOptimize(condition_residuals(g));
}
BENCHMARK(BM_ConditionResiduals);

void BM_AnisotropicScan(benchmark::State& state) {
  const GraphPlaneSampler sampler{5};
  for (auto _ : state)
    benchmark::DoNotOptimize(anisotropic_scan(Splitting::standard(), sampler, static_cast<std::size_t>(state.range(0)),
                                              1e-10, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AnisotropicScan)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ClosednessFlags(benchmark::State& state) {
  const auto m = model_su2_semidirect();
  for (auto _ : state) benchmark::DoNotOptimize(closedness_flags(m));
}
BENCHMARK(BM_ClosednessFlags)->Unit(benchmark::kMicrosecond);

void BM_ImmersionEnergies(benchmark::State& state) {
  const auto u = add_maps(affine_fueter_section(Vec4(1, 0, -1, 0), Vec4(0, 2, 0, 1)), trig_perturbation(6, 0), 0.1);
  const auto iota = graph_immersion(u);
  const ImmersionGrid grid{static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(immersion_energies(iota, grid, 1));
}
BENCHMARK(BM_ImmersionEnergies)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_DdtResidual(benchmark::State& state) {
  auto rng = sample_rng(7, 0);
  const auto c = fm_transform(to_map(PolynomialMap::random(rng, 3, 2)));
  for (auto _ : state) benchmark::DoNotOptimize(ddt_residual(c, Vec3(0.1, 0.2, 0.3), 10.0));
}
BENCHMARK(BM_DdtResidual);

}  // namespace

BENCHMARK_MAIN();
