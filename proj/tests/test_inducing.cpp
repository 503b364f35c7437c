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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <vector>

#include "gpmotion/errors.hpp"
#include "gpmotion/inducing.hpp"
#include "gpmotion/rng.hpp"

using namespace gpmotion;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent spectral route: complex-exponential accumulation, in contrast
// to the library's real cosine/sine pair.
double dft_magnitude_oracle(const std::vector<double>& x, int bin) {
  std::complex<double> acc{0.0, 0.0};
  const auto n = static_cast<double>(x.size());
  for (std::size_t s = 0; s < x.size(); ++s) {
    acc += std::polar(x[s], -2.0 * kPi * bin * static_cast<double>(s) / n);
  }
  return std::abs(acc);
}

MatX constant_trajectory(int frames, const Vec3& c) {
  MatX traj(frames, 3);
  for (int s = 0; s < frames; ++s) traj.row(s) = c.transpose();
  return traj;
}

// Axis-aligned sinusoid p_x(s) = amp * sin(2 pi cycles s / frames); sampling
// at s/frames keeps the signal exactly periodic over the window.
MatX sinusoid_trajectory(int frames, int cycles, double amp,
                         const Vec3& base) {
  MatX traj(frames, 3);
  for (int s = 0; s < frames; ++s) {
    traj.row(s) = base.transpose();
    traj(s, 0) += amp * std::sin(2.0 * kPi * cycles * s / frames);
  }
  return traj;
}

MatX random_trajectory(int frames, Rng& rng) {
  MatX traj(frames, 3);
  for (int s = 0; s < frames; ++s) {
    traj.row(s) = Vec3(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                       rng.uniform(-2.0, 2.0))
                      .transpose();
  }
  return traj;
}

// Four statics at spread-out positions followed by four sinusoid movers;
// descriptor distance between the groups dwarfs within-group distance.
std::vector<MatX> two_group_trajectories(int frames) {
  std::vector<MatX> trajs;
  Rng rng(91);
  for (int k = 0; k < 4; ++k) {
    const Vec3 base(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                    rng.uniform(-1.0, 1.0));
    trajs.push_back(constant_trajectory(frames, base));
  }
  for (int k = 0; k < 4; ++k) {
    const Vec3 base(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                    rng.uniform(-1.0, 1.0));
    trajs.push_back(sinusoid_trajectory(frames, 2, 1.0, base));
  }
  return trajs;
}

std::vector<double> uniform_times(int frames) {
  std::vector<double> times(frames);
  for (int s = 0; s < frames; ++s) times[s] = double(s) / (frames - 1);
  return times;
}

}  // namespace

TEST_SUITE("inducing") {

TEST_CASE("constant trajectory reduces to its location statistics") {
  const Vec3 c(0.3, -0.7, 2.0);
  const auto desc = extract_descriptors({constant_trajectory(16, c)});
  REQUIRE(desc.size() == 1);
  REQUIRE(desc[0].size() == kDescriptorSize);
  for (int axis = 0; axis < 3; ++axis) {
    const auto f = desc[0].segment(axis * kDescriptorFeaturesPerAxis,
                                   kDescriptorFeaturesPerAxis);
    CHECK(f[0] == doctest::Approx(c[axis]).epsilon(1e-12));  // mean
    CHECK(f[1] == 0.0);                                      // std
    CHECK(f[2] == doctest::Approx(c[axis]).epsilon(1e-12));  // min
    CHECK(f[3] == doctest::Approx(c[axis]).epsilon(1e-12));  // max
    CHECK(f[4] == 0.0);                                      // mean abs step
    for (int b = 0; b < 8; ++b) CHECK(std::abs(f[5 + b]) < 1e-12);
    CHECK(f[13] == 0.0);  // autocorrelation, zero-variance convention
  }
}

TEST_CASE("descriptor features match the hand-computed four-frame series") {
  // x = [1, 2, 4, 3]: mean 2.5, population std sqrt(1.25), min 1, max 4,
  // mean abs step 4/3, lag-1 autocorrelation 0.75/5 = 0.15. Bins evaluated
  // by hand: X1 = -3+i, X2 = 0, X3 = conj(X1); frequencies above T alias
  // through the transform's own periodicity (X4 = X0 = 10).
  MatX traj(4, 3);
  traj.setZero();
  traj.col(0) << 1.0, 2.0, 4.0, 3.0;
  const auto desc = extract_descriptors({traj});
  const auto f = desc[0].head(kDescriptorFeaturesPerAxis);
  CHECK(f[0] == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(f[1] == doctest::Approx(std::sqrt(1.25)).epsilon(1e-12));
  CHECK(f[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f[3] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(f[4] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  const double root10 = std::sqrt(10.0);
  const double expected_bins[8] = {root10, 0.0, root10, 10.0,
                                   root10, 0.0, root10, 10.0};
  for (int b = 0; b < 8; ++b) {
    CHECK(f[5 + b] == doctest::Approx(expected_bins[b]).epsilon(1e-9));
  }
  CHECK(f[13] == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("sinusoid concentrates spectral mass in its frequency bin") {
  const int frames = 32;
  const auto desc =
      extract_descriptors({sinusoid_trajectory(frames, 2, 1.0, Vec3::Zero())});
  const auto fx = desc[0].head(kDescriptorFeaturesPerAxis);
  // Exactly periodic sampling: bin 2 magnitude = T/2, every other bin 0.
  CHECK(fx[5 + 1] == doctest::Approx(frames / 2.0).epsilon(1e-9));
  for (int b = 0; b < 8; ++b) {
    if (b == 1) continue;
    CHECK(std::abs(fx[5 + b]) < 1e-8);
  }
  // Off-grid sampling keeps the dominance claim if not the exact values.
  MatX off(frames, 3);
  off.setZero();
  for (int s = 0; s < frames; ++s) {
    off(s, 0) = std::sin(2.0 * kPi * 2.0 * s / (frames - 1));
  }
  const auto fo = extract_descriptors({off})[0].head(kDescriptorFeaturesPerAxis);
  for (int b = 0; b < 8; ++b) {
    if (b == 1) continue;
    CHECK(fo[5 + 1] > fo[5 + b]);
  }
}

TEST_CASE("spectral features agree with a complex-arithmetic oracle") {
  Rng rng(7);
  const MatX traj = random_trajectory(19, rng);
  const auto desc = extract_descriptors({traj});
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<double> series(19);
    for (int s = 0; s < 19; ++s) series[s] = traj(s, axis);
    for (int b = 1; b <= 8; ++b) {
      const double want = dft_magnitude_oracle(series, b);
      const double got = desc[0][axis * kDescriptorFeaturesPerAxis + 4 + b];
      CHECK(got == doctest::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("identical trajectories produce identical descriptors") {
  Rng rng(11);
  const MatX traj = random_trajectory(24, rng);
  const auto desc = extract_descriptors({traj, traj});
  CHECK((desc[0] - desc[1]).norm() == 0.0);
}

TEST_CASE("descriptor extraction ignores primitive order") {
  auto trajs = two_group_trajectories(40);
  const auto forward = extract_descriptors(trajs);
  std::reverse(trajs.begin(), trajs.end());
  const auto backward = extract_descriptors(trajs);
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    CHECK((forward[i] - backward[trajs.size() - 1 - i]).norm() == 0.0);
  }
}

TEST_CASE("short and inconsistent trajectories are rejected") {
  CHECK_THROWS_WITH_AS(extract_descriptors({constant_trajectory(3, Vec3::Zero())}),
                       "trajectory too short", ConfigError);
  CHECK_THROWS_AS(extract_descriptors({constant_trajectory(8, Vec3::Zero()),
                                       constant_trajectory(9, Vec3::Zero())}),
                  ConfigError);
  CHECK_THROWS_AS(extract_descriptors({}), ConfigError);
}

TEST_CASE("every primitive becomes a landmark when counts match") {
  Rng rng(3);
  std::vector<VecX> desc;
  for (int i = 0; i < 6; ++i) {
    VecX d(4);
    for (int j = 0; j < 4; ++j) d[j] = rng.uniform(-1.0, 1.0);
    desc.push_back(d);
  }
  const auto idx = kmeans_landmarks(desc, 6, 123);
  REQUIRE(idx.size() == 6);
  for (int i = 0; i < 6; ++i) CHECK(idx[i] == i);
}

TEST_CASE("clusters elect their centroid-nearest member") {
  // Two symmetric triples far apart; the middle member of each is exactly
  // the cluster mean, so any correct run must return indices 1 and 4.
  std::vector<VecX> desc;
  for (double v : {-0.1, 0.0, 0.1, 9.9, 10.0, 10.1}) {
    VecX d(2);
    d << v, 5.0;  // second feature constant, must be neutralized by scaling
    desc.push_back(d);
  }
  for (std::uint64_t seed : {1ull, 77ull, 4242ull}) {
    const auto idx = kmeans_landmarks(desc, 2, seed);
    REQUIRE(idx.size() == 2);
    CHECK(idx[0] == 1);
    CHECK(idx[1] == 4);
  }
}

TEST_CASE("landmarks split well-separated motion groups") {
  const auto desc = extract_descriptors(two_group_trajectories(40));
  const auto idx = kmeans_landmarks(desc, 2, 5);
  REQUIRE(idx.size() == 2);
  const int statics = int(idx[0] < 4) + int(idx[1] < 4);
  CHECK(statics == 1);
}

TEST_CASE("landmark selection is reproducible") {
  const auto desc = extract_descriptors(two_group_trajectories(32));
  const auto a = kmeans_landmarks(desc, 3, 99);
  const auto b = kmeans_landmarks(desc, 3, 99);
  CHECK(a == b);
}

TEST_CASE("too many landmarks are rejected") {
  std::vector<VecX> desc(3, VecX::Zero(5));
  CHECK_THROWS_WITH_AS(kmeans_landmarks(desc, 4, 0), "too many landmarks",
                       ConfigError);
  CHECK_THROWS_AS(kmeans_landmarks({}, 1, 0), ConfigError);
  CHECK_THROWS_AS(kmeans_landmarks(desc, 0, 0), ConfigError);
}

TEST_CASE("inducing grid is the landmark-time product") {
  const std::vector<Vec3> landmarks = {Vec3(1.0, 2.0, 3.0),
                                       Vec3(-1.0, 0.5, 0.0)};
  const auto init = build_inducing_set(landmarks, 3, 0.0, 1.0);
  REQUIRE(init.time_samples.size() == 3);
  CHECK(init.time_samples[0] == 0.0);
  CHECK(init.time_samples[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(init.time_samples[2] == 1.0);
  REQUIRE(init.points.size() == 6);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Vec4& z = init.points[i * 3 + j];
      CHECK((z.head<3>() - landmarks[i]).norm() == 0.0);
      CHECK(z[3] == init.time_samples[j]);
    }
  }

  const auto big = build_inducing_set(std::vector<Vec3>(8, Vec3::Zero()), 8,
                                      0.0, 1.0);
  CHECK(big.points.size() == 64);
  for (int j = 0; j < 8; ++j) {
    CHECK(big.time_samples[j] == doctest::Approx(j / 7.0).epsilon(1e-15));
  }
}

TEST_CASE("single time sample sits at the window midpoint") {
  const auto unit =
      build_inducing_set({Vec3(0.0, 0.0, 0.0)}, 1, 0.0, 1.0);
  REQUIRE(unit.time_samples.size() == 1);
  CHECK(unit.time_samples[0] == 0.5);
  const auto shifted =
      build_inducing_set({Vec3(0.0, 0.0, 0.0)}, 1, 0.2, 0.8);
  CHECK(shifted.time_samples[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("random baseline draws distinct observed pairs") {
  Rng rng(17);
  std::vector<MatX> trajs;
  for (int k = 0; k < 100; ++k) trajs.push_back(random_trajectory(10, rng));
  const auto times = uniform_times(10);
  const auto init = baseline_init(trajs, times, {}, 4, 4,
                                  BaselineInitKind::Random, 555);
  REQUIRE(init.points.size() == 16);
  std::set<std::pair<int, int>> seen;
  for (const Vec4& z : init.points) {
    bool found = false;
    for (int k = 0; k < 100 && !found; ++k) {
      for (int s = 0; s < 10 && !found; ++s) {
        if ((z.head<3>() - trajs[k].row(s).transpose()).norm() == 0.0 &&
            z[3] == times[s]) {
          CHECK(seen.emplace(k, s).second);
          found = true;
        }
      }
    }
    CHECK(found);
  }
  const auto again = baseline_init(trajs, times, {}, 4, 4,
                                   BaselineInitKind::Random, 555);
  REQUIRE(again.points.size() == 16);
  for (int i = 0; i < 16; ++i) {
    CHECK((init.points[i] - again.points[i]).norm() == 0.0);
  }
}

TEST_CASE("velocity baseline separates movers from statics") {
  const int frames = 40;
  const auto trajs = two_group_trajectories(frames);
  std::vector<Vec3> canonical;
  for (const auto& t : trajs) canonical.push_back(t.row(0).transpose());
  const auto init = baseline_init(trajs, uniform_times(frames), canonical, 2,
                                  2, BaselineInitKind::VelocityKnn, 31);
  REQUIRE(init.landmark_positions.size() == 2);
  REQUIRE(init.points.size() == 4);
  int statics = 0;
  for (const Vec3& p : init.landmark_positions) {
    for (int k = 0; k < 4; ++k) {
      if ((p - canonical[k]).norm() == 0.0) ++statics;
    }
  }
  CHECK(statics == 1);
  CHECK(init.time_samples.front() == 0.0);
  CHECK(init.time_samples.back() == 1.0);
}

TEST_CASE("baseline input mismatches are rejected") {
  Rng rng(2);
  const std::vector<MatX> trajs = {random_trajectory(8, rng)};
  CHECK_THROWS_AS(baseline_init(trajs, uniform_times(7), {}, 1, 1,
                                BaselineInitKind::Random, 0),
                  ConfigError);
  // Sampling more pairs than observations exist.
  CHECK_THROWS_AS(baseline_init(trajs, uniform_times(8), {}, 3, 3,
                                BaselineInitKind::Random, 0),
                  ConfigError);
  // Clustering variant requires one canonical position per primitive.
  CHECK_THROWS_AS(baseline_init(trajs, uniform_times(8), {}, 1, 1,
                                BaselineInitKind::VelocityKnn, 0),
                  ConfigError);
}

}  // TEST_SUITE
