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
#include "gpmotion/splat.hpp"

using namespace gpmotion;

static void BM_Render(benchmark::State& state) {
  const int count = static_cast<int>(state.range(0));
  Rng rng(substream_seed(3, "bench-render"));
  Camera cam;
  cam.width = 64;
  cam.height = 64;
  cam.units_per_pixel = 0.05;
  std::vector<Primitive> prims;
  std::vector<Vec9> deformations;
  for (int k = 0; k < count; ++k) {
    Primitive prim;
    prim.position = Vec3(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2),
                         rng.uniform(0.5, 3.0));
    prim.scale = Vec3(rng.uniform(0.02, 0.2), rng.uniform(0.02, 0.2),
                      rng.uniform(0.02, 0.2));
    prim.opacity = rng.uniform(0.2, 1.0);
    prim.color = Vec3(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0),
                      rng.uniform(0.0, 1.0));
    prims.push_back(prim);
    Vec9 y;
    y << rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), 0.0, 1.0, 0.0, 0.0,
        0.0, 1.0, 0.0;
    deformations.push_back(y);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(render(prims, deformations, cam));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Render)->Arg(16)->Arg(64)->Arg(256)->Complexity();
