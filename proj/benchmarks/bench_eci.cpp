#include <benchmark/benchmark.h>

#include "eci/calculus.hpp"
#include "eci/field_ops.hpp"
#include "eci/holder.hpp"
#include "eci/interp.hpp"
#include "eci/random_fields.hpp"

using namespace eci;

namespace {

PeriodicField bench_field(int n, int rank, int band) {
  RandomFieldGen gen(42);
  RandomFieldGen::Options opts;
  opts.band = band;
  return gen.field(Grid3(n), rank, opts);
}

}  // namespace

static void BM_fft_forward(benchmark::State& state) {
  PeriodicField f = bench_field(int(state.range(0)), 0, 8);
  for (auto _ : state) {
    Spectrum s = fft_forward(f);
    benchmark::DoNotOptimize(s.raw().data());
  }
}
BENCHMARK(BM_fft_forward)->Arg(64)->Arg(128);

static void BM_dealiased_product(benchmark::State& state) {
  const int n = int(state.range(0));
  RandomFieldGen gen(7);
  PeriodicField a = gen.scalar(Grid3(n), n / 2 - 1);
  PeriodicField b = gen.scalar(Grid3(n), n / 2 - 1);
  for (auto _ : state) {
    PeriodicField p = mult_ss(a, b);
    benchmark::DoNotOptimize(p.raw().data());
  }
}
BENCHMARK(BM_dealiased_product)->Arg(64)->Arg(128);

static void BM_inverse_divergence(benchmark::State& state) {
  PeriodicField v = bench_field(int(state.range(0)), 1, 8);
  for (auto _ : state) {
    PeriodicField r = inverse_divergence(v);
    benchmark::DoNotOptimize(r.raw().data());
  }
}
BENCHMARK(BM_inverse_divergence)->Arg(64)->Arg(128);

static void BM_holder_seminorm1(benchmark::State& state) {
  PeriodicField v = bench_field(int(state.range(0)), 1, 8);
  for (auto _ : state) benchmark::DoNotOptimize(holder_seminorm_int(v, 1));
}
BENCHMARK(BM_holder_seminorm1)->Arg(64)->Arg(128);

static void BM_trig_interp_eval(benchmark::State& state) {
  PeriodicField v = bench_field(64, 1, 8);
  TrigInterpolator ti(v);
  double out[3];
  double x = 0.1;
  for (auto _ : state) {
    ti.eval(x, 2.0 * x, 0.7 * x, out);
    benchmark::DoNotOptimize(out);
    x += 0.0131;
  }
}
BENCHMARK(BM_trig_interp_eval);

BENCHMARK_MAIN();
