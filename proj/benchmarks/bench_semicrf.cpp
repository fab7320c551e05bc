#include <benchmark/benchmark.h>

#include "segtag/rng.hpp"
#include "segtag/semicrf.hpp"

namespace {

using namespace segtag;

ScoredLattice RandomLattice(std::size_t t, std::size_t l, std::size_t labels, Rng& rng) {
  ScoredLattice lat = ScoredLattice::Zeros(t, l, labels);
  for (auto& m : lat.by_length) {
    for (double& v : m.data()) v = rng.Uniform(-1.0, 1.0);
  }
  return lat;
}

Tensor RandomTransitions(std::size_t labels, Rng& rng) {
  Tensor a({labels + 1, labels});
  for (double& v : a.data()) v = rng.Uniform(-1.0, 1.0);
  return a;
}

void BM_LogPartition(benchmark::State& state) {
  Rng rng(7);
  const auto t = static_cast<std::size_t>(state.range(0));
  ScoredLattice lat = RandomLattice(t, 23, 17, rng);
  Tensor a = RandomTransitions(17, rng);
  for (auto _ : state) benchmark::DoNotOptimize(LogPartition(lat, a));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LogPartition)->Arg(20)->Arg(80)->Arg(200);

void BM_Viterbi(benchmark::State& state) {
  Rng rng(7);
  const auto t = static_cast<std::size_t>(state.range(0));
  ScoredLattice lat = RandomLattice(t, 23, 17, rng);
  Tensor a = RandomTransitions(17, rng);
  for (auto _ : state) benchmark::DoNotOptimize(Viterbi(lat, a));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Viterbi)->Arg(20)->Arg(80)->Arg(200);

void BM_Marginals(benchmark::State& state) {
  Rng rng(7);
  ScoredLattice lat = RandomLattice(80, 23, 17, rng);
  Tensor a = RandomTransitions(17, rng);
  for (auto _ : state) benchmark::DoNotOptimize(Marginals(lat, a));
}
BENCHMARK(BM_Marginals);

}  // namespace
