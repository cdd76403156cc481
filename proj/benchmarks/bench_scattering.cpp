// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "pscat/autograd.hpp"
#include "pscat/rng.hpp"
#include "pscat/scattering.hpp"
#include "pscat/spectral.hpp"

namespace {

using namespace pscat;

FilterBank make_bank(int J, int L, int n) {
  FilterbankSpec s;
  s.J = J;
  s.L = L;
  s.n = n;
  return FilterBank(s);
}

std::vector<RealField> make_batch(int count, int n) {
  Rng rng(1);
  std::vector<RealField> batch(count, RealField(n));
  for (auto& x : batch)
    for (auto& v : x) v = rng.normal();
  return batch;
}

// args: n, J, L
void BM_FixedForward(benchmark::State& state) {
  const auto bank = make_bank(static_cast<int>(state.range(1)), static_cast<int>(state.range(2)),
                              static_cast<int>(state.range(0)));
  const auto batch = make_batch(8, bank.n());
  for (auto _ : state) benchmark::DoNotOptimize(forward(batch, bank));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(batch.size()));
}

void BM_LearnableForwardBackward(benchmark::State& state) {
  auto bank = make_bank(static_cast<int>(state.range(1)), static_cast<int>(state.range(2)),
                        static_cast<int>(state.range(0)));
  const auto batch = make_batch(8, bank.n());
  for (auto _ : state) {
    bank.set_flat(bank.flat());
    bank.realize();
    Tape tape;
    auto out = forward(batch, bank, &tape);
    for (auto& v : out.data) v = 1.0;
    const auto grads = scattering_backward(tape, bank, out);
    benchmark::DoNotOptimize(param_chain(grads.filter_hat, bank));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(batch.size()));
}

void BM_Realize(benchmark::State& state) {
  auto bank = make_bank(static_cast<int>(state.range(1)), static_cast<int>(state.range(2)),
                        static_cast<int>(state.range(0)));
  for (auto _ : state) {
    bank.set_flat(bank.flat());
    bank.realize();
  }
}

void BM_Fft2(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ComplexField x(n);
  Rng rng(2);
  for (auto& v : x) v = {rng.normal(), rng.normal()};
  for (auto _ : state) benchmark::DoNotOptimize(fft2(x));
}

}  // namespace

BENCHMARK(BM_FixedForward)->Args({32, 2, 8})->Args({64, 3, 8})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LearnableForwardBackward)->Args({32, 2, 8})->Args({64, 3, 8})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Realize)->Args({32, 2, 8})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Fft2)->Arg(32)->Arg(64)->Arg(128);

BENCHMARK_MAIN();
