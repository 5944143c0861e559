#include <benchmark/benchmark.h>

#include "mvreg/phantom.hpp"
#include "mvreg/pipeline.hpp"
#include "mvreg/projector.hpp"

using namespace mvreg;

namespace {

const Volume& study_volume() {
  static const Volume vol = [] {
    auto [v, marks] =
        make_phantom(PhantomKind::sphere_pair, {64, 64, 64}, Vec3::Ones(), 20);
    return v;
  }();
  return vol;
}

}  // namespace

static void BM_AttenuateSingleRay(benchmark::State& state) {
  const Volume& vol = study_volume();
  const DetectorGeometry geom(400.0, 128, 128, 1.4);
  const Pose pose = make_pa_pose(vol.center(), 200.0);
  int u = 0;
  for (auto _ : state) {
    const Ray ray = pixel_ray(geom, pose, u % 128, (u / 128) % 128);
    benchmark::DoNotOptimize(attenuate(ray, vol));
    ++u;
  }
}
BENCHMARK(BM_AttenuateSingleRay);

static void BM_SiddonIntersections(benchmark::State& state) {
  const Volume& vol = study_volume();
  const DetectorGeometry geom(400.0, 128, 128, 1.4);
  const Pose pose = make_pa_pose(vol.center(), 200.0);
  const Ray ray = pixel_ray(geom, pose, 64, 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(siddon_intersections(ray, vol));
  }
}
BENCHMARK(BM_SiddonIntersections);

static void BM_RenderStudyDetector(benchmark::State& state) {
  const Volume& vol = study_volume();
  const DetectorGeometry geom(400.0, 128, 128, 1.4);
  const Pose pose = make_pa_pose(vol.center(), 200.0);
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        render(vol, geom, pose, RenderMode::intensity, workers));
  }
}
BENCHMARK(BM_RenderStudyDetector)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
