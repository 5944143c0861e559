#include <benchmark/benchmark.h>

#include <random>

#include "mvreg/se3.hpp"

using namespace mvreg;

namespace {

Twist some_twist(std::uint64_t i) {
  Vec6 v;
  v << 3.0 + 0.1 * (i % 7), -2.0, 1.5, 0.2, -0.4, 0.3 + 0.01 * (i % 5);
  return Twist(v);
}

}  // namespace

static void BM_Exp(benchmark::State& state) {
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exp(some_twist(i++)));
  }
}
BENCHMARK(BM_Exp);

static void BM_LogExpRoundtrip(benchmark::State& state) {
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log(exp(some_twist(i++))));
  }
}
BENCHMARK(BM_LogExpRoundtrip);

static void BM_GeodesicDistance(benchmark::State& state) {
  const Pose a = exp(some_twist(1));
  const Pose b = exp(some_twist(2));
  for (auto _ : state) {
    benchmark::DoNotOptimize(geodesic_distance(a, b, 400.0));
  }
}
BENCHMARK(BM_GeodesicDistance);

static void BM_SampleTwist(benchmark::State& state) {
  const TwistDistribution dist(Vec6::Zero(), Vec6::Ones());
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_twist(dist, seed++));
  }
}
BENCHMARK(BM_SampleTwist);
