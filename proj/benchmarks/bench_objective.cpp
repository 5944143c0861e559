#include <benchmark/benchmark.h>

#include "mvreg/objective.hpp"
#include "mvreg/phantom.hpp"
#include "mvreg/pipeline.hpp"

using namespace mvreg;

static void BM_Ncc(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  Image a(side, side, 1.4);
  Image b(side, side, 1.4);
  for (std::size_t p = 0; p < a.data.size(); ++p) {
    a.data[p] = static_cast<float>((p * 2654435761u) % 1000) / 1000.0f;
    b.data[p] = static_cast<float>((p * 40503u) % 1000) / 1000.0f;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(ncc(a, b));
  }
}
BENCHMARK(BM_Ncc)->Arg(128)->Arg(256);

static void BM_RefineObjective(benchmark::State& state) {
  auto [vol, marks] =
      make_phantom(PhantomKind::sphere_pair, {64, 64, 64}, Vec3::Ones(), 20);
  const DetectorGeometry geom(400.0, 128, 128, 1.4);
  const Pose base = make_pa_pose(vol.center(), 200.0);
  const std::array<Pose, 2> bases = {base, base};
  const std::array<Image, 2> fixed = {render(vol, geom, base),
                                      render(vol, geom, base)};
  const std::array<double, 2> weights = {0.5, 0.5};
  std::array<Twist, 2> deltas{};
  deltas[0].rho.x() = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        refine_objective(deltas, bases, fixed, vol, geom, weights));
  }
}
BENCHMARK(BM_RefineObjective)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
