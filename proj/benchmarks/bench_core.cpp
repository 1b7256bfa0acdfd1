#include <benchmark/benchmark.h>

#include "spikedet/eta.hpp"
#include "spikedet/moments.hpp"
#include "spikedet/random.hpp"
#include "spikedet/spike_model.hpp"
#include "spikedet/tensor.hpp"
#include "spikedet/thresholds.hpp"

namespace {

using namespace spikedet;

void BM_ModeProduct(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng({1, 0});
  const ComplexTensor z = sample_gaussian_tensor(n, 3, rng);
  std::vector<CMatrix> thetas;
  for (int k = 0; k < 3; ++k) thetas.push_back(sample_haar_unitary(n, rng));
  const ModeOperators ops(std::move(thetas));
  for (auto _ : state) benchmark::DoNotOptimize(mode_product(ops, z));
}
BENCHMARK(BM_ModeProduct)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

void BM_HaarUnitary(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng({2, 0});
  for (auto _ : state) benchmark::DoNotOptimize(sample_haar_unitary(n, rng));
}
BENCHMARK(BM_HaarUnitary)->Arg(4)->Arg(16)->Arg(64);

void BM_EtaExpanded(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng({3, 0});
  const SpikeSpec spec = make_spike({0.5, 0.4, 0.3}, repeat_gram(identity_gram(3), 3), n, &rng);
  std::vector<CMatrix> thetas;
  for (int k = 0; k < 3; ++k) thetas.push_back(sample_haar_unitary(n, rng));
  for (auto _ : state) benchmark::DoNotOptimize(eta_expanded_unchecked(spec, thetas));
}
BENCHMARK(BM_EtaExpanded)->Arg(8)->Arg(32);

void BM_EtaHadamard(benchmark::State& state) {
  Rng rng({4, 0});
  const SpikeSpec spec = make_spike({0.5, 0.4, 0.3}, repeat_gram(identity_gram(3), 3), 8, &rng);
  const SpikeSvd svd = spike_svd(spec);
  const PsiSet psis = sample_psi_set(3, 3, 8, rng);
  for (auto _ : state) benchmark::DoNotOptimize(eta_hadamard(spec.lambdas, svd, psis));
}
BENCHMARK(BM_EtaHadamard);

void BM_BetaDSecond(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(beta_d_second(d));
}
BENCHMARK(BM_BetaDSecond)->Arg(3)->Arg(10);

void BM_SecondMomentHaar(benchmark::State& state) {
  const SpikeSpec spec = make_spike({0.5}, repeat_gram(identity_gram(1), 3), 8);
  std::uint64_t stream = 0;
  for (auto _ : state) benchmark::DoNotOptimize(second_moment_haar_mc(spec, 1000, {5, stream++}, 1));
}
BENCHMARK(BM_SecondMomentHaar)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
