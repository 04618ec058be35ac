#include <benchmark/benchmark.h>

#include "objf/common/rng.hpp"
#include "objf/geometry/bvh.hpp"
#include "objf/geometry/shapes.hpp"

namespace {

void BM_BvhRaycastIcosphere(benchmark::State& state) {
  auto mesh = objf::make_icosphere({0, 0, 0}, 0.05, static_cast<int>(state.range(0)));
  objf::Bvh bvh(mesh);
  objf::Rng rng(7);
  for (auto _ : state) {
    objf::Vec3 dir(rng.normal(), rng.normal(), rng.normal());
    dir.normalize();
    auto hit = bvh.raycast(-0.5 * dir, dir);
    benchmark::DoNotOptimize(hit);
  }
}
BENCHMARK(BM_BvhRaycastIcosphere)->Arg(3)->Arg(5);

}  // namespace

BENCHMARK_MAIN();
