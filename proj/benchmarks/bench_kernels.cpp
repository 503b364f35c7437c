/*
 * Copyright 2026 The gpmotion Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include "gpmotion/kernels.hpp"
#include "gpmotion/rng.hpp"

using namespace gpmotion;

static void BM_GramMatrix(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(substream_seed(1, "bench-gram"));
  std::vector<Vec4> X;
  X.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    X.push_back(Vec4(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                     rng.uniform(0, 1)));
  CompositeKernel k(CompositeKernelParams::defaults());
  for (auto _ : state) {
    benchmark::DoNotOptimize(gram_matrix(k, X, 1e-6));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GramMatrix)->Arg(32)->Arg(64)->Arg(128)->Complexity();

static void BM_KernelGradient(benchmark::State& state) {
  Rng rng(substream_seed(1, "bench-grad"));
  CompositeKernel k(CompositeKernelParams::defaults());
  const Vec4 a(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform());
  const Vec4 b(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform());
  for (auto _ : state) {
    benchmark::DoNotOptimize(k.eval_grad(a, b));
  }
}
BENCHMARK(BM_KernelGradient);

BENCHMARK_MAIN();
