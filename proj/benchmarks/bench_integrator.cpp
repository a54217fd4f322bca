#include <benchmark/benchmark.h>

#include "bilayer/dtwa.hpp"
#include "bilayer/pipeline.hpp"

namespace {

using namespace bilayer;

EffectiveModel make_model(int side, double alpha, double a_z, ModelKind kind) {
  LatticeSpec spec;
  spec.side = side;
  spec.a_z = a_z;
  spec.alpha = alpha;
  const SiteSet sites = build_sites(spec);
  return build_model(kind, compute_couplings(sites, alpha));
}

void BM_IntegratorStep(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const std::size_t traj = static_cast<std::size_t>(state.range(1));
  LatticeSpec lspec;
  lspec.side = side;
  lspec.a_z = 2.0;
  lspec.alpha = 3.0;
  const SiteSet sites = build_sites(lspec);
  const EffectiveModel model = make_model(side, 3.0, 2.0, ModelKind::FloquetEngineered);
  const SpinEnsemble initial = sample_initial(sites, traj, 7);
  const double dt = default_time_step(model, 0.02);
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.threads = 1;
  cfg.check_conservation = false;
  cfg.sample_times = {10 * dt};
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate(initial, model, cfg));
  }
  // 4 RK stages, 3 components, 2 flops per matrix entry, ~M^2 entries
  const double m = static_cast<double>(model.size());
  state.SetItemsProcessed(state.iterations() * 10 * static_cast<std::int64_t>(traj));
  state.counters["flops/s"] = benchmark::Counter(
      state.iterations() * 10.0 * traj * 4 * 3 * 2 * m * m, benchmark::Counter::kIsRate);
}
BENCHMARK(BM_IntegratorStep)->Args({10, 128})->Args({20, 128})->Unit(benchmark::kMillisecond);

void BM_EffectiveField(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const EffectiveModel model = make_model(side, 3.0, 2.0, ModelKind::StaggeredField);
  std::vector<Vec3> spins(model.size(), Vec3{0.5, -0.5, 0.5});
  for (auto _ : state) {
    benchmark::DoNotOptimize(effective_field(model, spins));
  }
}
BENCHMARK(BM_EffectiveField)->Arg(6)->Arg(12)->Unit(benchmark::kMicrosecond);

void BM_CollectiveEvolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto h = build_collective_hamiltonian(ModelKind::FloquetEngineered, n, 1.0);
  std::vector<double> times;
  for (int k = 0; k <= 40; ++k) times.push_back(6.0 * k / 40.0 / n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evolve_collective(h, times));
  }
}
BENCHMARK(BM_CollectiveEvolve)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
