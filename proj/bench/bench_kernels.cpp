// Serial reference loops against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "stolab/kernels.hpp"
#include "stolab/rng.hpp"

namespace ks = stolab::kernels::serial;
namespace kp = stolab::kernels::parallel;

namespace {

std::vector<double> points(std::size_t n) {
  stolab::Stream rng(1);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform();
  return x;
}

template <auto Kernel>
void transfer_sum(benchmark::State& state) {
  const std::size_t G = state.range(0);
  const auto map = stolab::make_map("linear-k", {{"k", 5}});
  std::vector<double> v(G);
  for (std::size_t j = 0; j < G; ++j) v[j] = 2.0 + std::sin(6.283185307179586 * j / G);
  const stolab::PeriodicSpline s(v);
  std::vector<double> out(G);
  for (auto _ : state) {
    Kernel(*map, s, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Kernel>
void matvec(benchmark::State& state) {
  const std::size_t n = state.range(0);
  const auto a = points(n * n);
  const auto x = points(n);
  std::vector<double> out(n);
  for (auto _ : state) {
    Kernel(a, x, 1.0 / n, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Kernel>
void mean_cos(benchmark::State& state) {
  const auto x = points(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(x));
}

template <auto Kernel>
void det_step(benchmark::State& state) {
  const auto x = points(state.range(0));
  std::vector<double> out(x.size());
  for (auto _ : state) {
    Kernel(x, 5.0, -0.155, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(transfer_sum<ks::transfer_sum>)->Name("transfer_sum/serial")->Arg(1024)->Arg(4096);
BENCHMARK(transfer_sum<kp::transfer_sum>)->Name("transfer_sum/parallel")->Arg(1024)->Arg(4096);
BENCHMARK(matvec<ks::matvec>)->Name("matvec/serial")->Arg(1024);
BENCHMARK(matvec<kp::matvec>)->Name("matvec/parallel")->Arg(1024);
BENCHMARK(mean_cos<ks::mean_cos>)->Name("mean_cos/serial")->Arg(10000)->Arg(1000000);
BENCHMARK(mean_cos<kp::mean_cos>)->Name("mean_cos/parallel")->Arg(10000)->Arg(1000000);
BENCHMARK(det_step<ks::det_step>)->Name("det_step/serial")->Arg(10000)->Arg(1000000);
BENCHMARK(det_step<kp::det_step>)->Name("det_step/parallel")->Arg(10000)->Arg(1000000);

BENCHMARK_MAIN();
