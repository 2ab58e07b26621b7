#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "wavelab/kernels.hpp"
#include "wavelab/semidisc.hpp"

using namespace wavelab;

namespace {

struct Problem {
  SemiDiscretization1D sd;
  std::vector<double> u;
  std::vector<double> out;

  Problem(int order, int n)
      : sd(assemble_1d(build_sbp_d2(order, Grid1D::unit(n)), BoundaryKind::dirichlet)),
        u(static_cast<std::size_t>(n) * n),
        out(u.size()) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto& x : u) x = dist(rng);
  }
};

template <bool Parallel>
void kron_sum(benchmark::State& state) {
  Problem p(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const auto& a = p.sd.matrix();
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::apply_kron_sum(a, a, p.u.data(), p.out.data());
    } else {
      kernels::apply_kron_sum_serial(a, a, p.u.data(), p.out.data());
    }
    benchmark::DoNotOptimize(p.out.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.u.size()));
  state.counters["threads"] = Parallel ? kernels::max_threads() : 1;
}

void args(benchmark::internal::Benchmark* b) {
  for (int order : {2, 4, 6}) {
    for (int n : {81, 321, 641}) b->Args({order, n});
  }
  b->ArgNames({"order", "n"});
}

}  // namespace

BENCHMARK(kron_sum<false>)->Name("kron_sum/serial")->Apply(args);
BENCHMARK(kron_sum<true>)->Name("kron_sum/openmp")->Apply(args);

BENCHMARK_MAIN();
