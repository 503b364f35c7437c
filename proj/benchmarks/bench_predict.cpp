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

#include <vector>

#include "gpmotion/rng.hpp"
#include "gpmotion/svgp.hpp"

using namespace gpmotion;

namespace {

std::vector<Vec4> random_inputs(int n, Rng& rng) {
  std::vector<Vec4> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i)
    out.push_back(Vec4(rng.uniform(), rng.uniform(), rng.uniform(),
                       rng.uniform()));
  return out;
}

}  // namespace

// Per-query predictive cost; the factorization cache is warm, so the loop
// measures the O(M) mean and O(M^2) variance back-substitutions.
static void BM_Predict(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  Rng rng(substream_seed(2, "bench-predict"));
  SparseGP gp(SvgpOptions{}, Normalization::identity(), random_inputs(m, rng));
  const Vec4 query(0.3, 0.4, 0.5, 0.6);
  gp.predict(query);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gp.predict(query));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Predict)->Arg(16)->Arg(32)->Arg(64)->Complexity();

// One minibatch bound-and-gradient evaluation, the training inner loop.
static void BM_ElboGradient(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int batch = 128;
  Rng rng(substream_seed(2, "bench-elbo"));
  SparseGP gp(SvgpOptions{}, Normalization::identity(), random_inputs(m, rng));
  const std::vector<Vec4> X = random_inputs(batch, rng);
  MatX Y(batch, kOutputDims);
  for (int i = 0; i < Y.size(); ++i) Y.data()[i] = rng.normal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(gp.elbo_gradient(X, Y, 1.0));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ElboGradient)->Arg(16)->Arg(32)->Arg(64)->Complexity();
