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

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "gpmotion/types.hpp"

namespace gpmotion {

// Deterministic random stream. Gaussian draws use Box-Muller on top of
// mt19937_64 rather than std::normal_distribution, whose output is not
// reproducible across standard library implementations; byte-identical
// artifacts depend on this.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1), 53 bits of mantissa.
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0, n), n > 0, rejection-sampled (no modulo bias).
  std::uint64_t uniform_int(std::uint64_t n);
  // Standard normal draw.
  double normal();
  double normal(double mean, double stddev);
  Vec3 normal3(double stddev);

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

// Derives a substream seed from a master seed and a stream name, optionally
// indexed. Distinct names or indices give uncorrelated streams; the scheme is
// a fixed FNV-1a / splitmix64 combination and never changes between runs.
std::uint64_t substream_seed(std::uint64_t master, std::string_view name);
std::uint64_t substream_seed(std::uint64_t master, std::string_view name,
                             std::uint64_t a, std::uint64_t b = 0);

}  // namespace gpmotion
