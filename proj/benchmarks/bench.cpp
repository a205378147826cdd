#include <benchmark/benchmark.h>

#include "lsv/density.hpp"
#include "lsv/map.hpp"
#include "lsv/renewal.hpp"
#include "lsv/rng.hpp"

namespace {

void bm_transfer_step(benchmark::State& state) {
  lsv::LsvMap map(0.5);
  auto edges = lsv::GridDensity::make_edges(static_cast<std::size_t>(state.range(0)));
  lsv::GridDensity f = lsv::GridDensity::uniform(edges);
  for (auto _ : state) {
    f = lsv::transfer_step(map, f);
    benchmark::DoNotOptimize(f.values().data());
  }
}
BENCHMARK(bm_transfer_step)->Arg(4096)->Arg(32768);

void bm_inverse_branch(benchmark::State& state) {
  lsv::LsvMap map(0.5);
  double y = 0.123456789;
  for (auto _ : state) {
    y = 0.25 + 0.5 * lsv::inverse_branch(map, lsv::Branch::Left, y);
    benchmark::DoNotOptimize(y);
  }
}
BENCHMARK(bm_inverse_branch);

void bm_sample_S(benchmark::State& state) {
  lsv::RenewalSpec spec(0.25, 2, lsv::TailFunction::power(1.5, 1 << 12),
                        lsv::TailFunction::power(2.5, 1 << 12), 1.0);
  lsv::BlockTailFamily family(spec.h, spec.c_h, 1 << 16);
  lsv::rng::Stream stream(42, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lsv::sample_S(spec, family, stream));
  }
}
BENCHMARK(bm_sample_S);

}  // namespace

BENCHMARK_MAIN();
