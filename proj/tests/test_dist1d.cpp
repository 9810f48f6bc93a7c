/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "streamot/dist1d.hpp"
#include "streamot/error.hpp"
#include "streamot/random.hpp"

using namespace streamot;

namespace {

oracle::Atoms random_atoms(Rng& rng, std::size_t max_atoms) {
  const std::size_t n = 1 + rng.uniform_index(max_atoms);
  oracle::Atoms atoms;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.05 + rng.uniform();
    atoms.emplace_back(rng.normal() * 3.0, w);
    total += w;
  }
  for (auto& a : atoms) a.second /= total;
  return atoms;
}

Sketch sketch_of(const std::vector<double>& xs, std::uint32_t k, std::uint64_t seed = 0) {
  Sketch s(SketchConfig{k, seed});
  for (double x : xs) s.insert(x);
  return s;
}

}  // namespace

TEST_CASE("quantile_of follows the inf rule", "[dist1d]") {
  const auto m = WeightedDiscrete1D::from_pairs({{0, 0.5}, {2, 0.5}});
  CHECK(quantile_of(m, 0.5) == 0.0);
  CHECK(quantile_of(m, 0.50001) == 2.0);
  CHECK(quantile_of(m, 1.0) == 2.0);
  const auto point = WeightedDiscrete1D::point_mass(7.0);
  for (double q : {0.01, 0.5, 1.0}) CHECK(quantile_of(point, q) == 7.0);
  CHECK_THROWS_AS(quantile_of(m, 0.0), Error);
  CHECK_THROWS_AS(quantile_of(m, 1.01), Error);
}

TEST_CASE("measure construction validates", "[dist1d]") {
  CHECK_THROWS_AS(WeightedDiscrete1D::from_pairs({{0, 0.5}, {1, 0.4}}), Error);
  CHECK_THROWS_AS(WeightedDiscrete1D::from_pairs({{0, 1.2}, {1, -0.2}}), Error);
  CHECK_THROWS_AS(WeightedDiscrete1D::from_pairs({}), Error);
  const auto merged = WeightedDiscrete1D::from_pairs({{1, 0.25}, {0, 0.5}, {1, 0.25}});
  CHECK(merged.values() == std::vector<double>{0, 1});
  CHECK(merged.weights() == std::vector<double>{0.5, 0.5});
  const auto scaled = WeightedDiscrete1D::normalized({{3, 2}, {1, 6}});
  CHECK(scaled.values() == std::vector<double>{1, 3});
  CHECK(scaled.weights() == std::vector<double>{0.75, 0.25});
}

TEST_CASE("wasserstein1d_pp hand-computed values", "[dist1d]") {
  const auto at0 = WeightedDiscrete1D::point_mass(0.0);
  const auto at1 = WeightedDiscrete1D::point_mass(1.0);
  CHECK(wasserstein1d_pp(at0, at1, 1.0) == 1.0);

  const auto two = WeightedDiscrete1D::from_pairs({{0, 0.5}, {2, 0.5}});
  CHECK(wasserstein1d_pp(two, at1, 2.0) == Catch::Approx(1.0).epsilon(1e-15));

  // Breakpoints {1/3, 1/2, 2/3}: 1/6 + 1/12 + 1/12 + 1/6.
  const auto thirds = WeightedDiscrete1D::from_pairs({{0, 1.0 / 3}, {1, 1.0 / 3}, {2, 1.0 / 3}});
  const auto halves = WeightedDiscrete1D::from_pairs({{0.5, 0.5}, {1.5, 0.5}});
  CHECK(wasserstein1d_pp(thirds, halves, 1.0) == Catch::Approx(0.5).epsilon(1e-14));

  CHECK(wasserstein1d(two, at1, 2.0) == Catch::Approx(1.0));
  CHECK_THROWS_AS(wasserstein1d_pp(two, at1, 0.5), Error);
}

TEST_CASE("wasserstein1d_pp matches the northwest-corner and cdf-integral oracles", "[dist1d][property]") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_atoms(rng, 50);
    const auto b = random_atoms(rng, 50);
    const auto ma = WeightedDiscrete1D::from_pairs(a);
    const auto mb = WeightedDiscrete1D::from_pairs(b);
    const double w1 = wasserstein1d_pp(ma, mb, 1.0);
    REQUIRE(std::abs(w1 - oracle::northwest_corner_cost(a, b, 1.0)) <= 1e-9);
    REQUIRE(std::abs(w1 - oracle::w1_cdf_integral(a, b)) <= 1e-9);
    const double w3 = wasserstein1d_pp(ma, mb, 3.0);
    REQUIRE(std::abs(w3 - oracle::northwest_corner_cost(a, b, 3.0)) <= 1e-9 * std::max(1.0, w3));
  }
}

TEST_CASE("metric properties", "[dist1d][property]") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = WeightedDiscrete1D::from_pairs(random_atoms(rng, 10));
    const auto b = WeightedDiscrete1D::from_pairs(random_atoms(rng, 10));
    const auto c = WeightedDiscrete1D::from_pairs(random_atoms(rng, 10));
    for (double p : {1.0, 2.0, 2.5}) {
      REQUIRE(wasserstein1d_pp(a, b, p) >= 0.0);
      REQUIRE(wasserstein1d_pp(a, b, p) == Catch::Approx(wasserstein1d_pp(b, a, p)).epsilon(1e-12));
      REQUIRE(wasserstein1d_pp(a, a, p) == 0.0);
    }
    REQUIRE(wasserstein1d_pp(a, c, 1.0) <= wasserstein1d_pp(a, b, 1.0) + wasserstein1d_pp(b, c, 1.0) + 1e-12);
  }
}

TEST_CASE("stream_w1d on uncompacted sketches is exact", "[dist1d]") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs(1 + rng.uniform_index(64));
    std::vector<double> ys(1 + rng.uniform_index(64));
    for (auto& x : xs) x = rng.normal();
    for (auto& y : ys) y = rng.normal() + 0.5;
    const auto sa = sketch_of(xs, 128);
    const auto sb = sketch_of(ys, 128);
    const double exact = wasserstein1d_pp(WeightedDiscrete1D::empirical(xs), WeightedDiscrete1D::empirical(ys), 2.0);
    REQUIRE(std::abs(stream_w1d(sa, sb, 2.0) - exact) <= 1e-12);
    REQUIRE(stream_w1d(sa, sa, 2.0) == 0.0);
    REQUIRE(one_sided_stream_w1d(sa, WeightedDiscrete1D::empirical(xs), 2.0) == 0.0);
  }
  const auto c = sketch_of({2.5, 2.5, 2.5}, 8);
  CHECK(one_sided_stream_w1d(c, WeightedDiscrete1D::point_mass(2.5), 1.0) == 0.0);
  CHECK_THROWS_AS(stream_w1d(Sketch(SketchConfig{8, 0}), c, 2.0), Error);
}

TEST_CASE("stream_w1d recovers the shift between uniforms", "[dist1d]") {
  Rng rng(10);
  Sketch a(SketchConfig{64, 1});
  Sketch b(SketchConfig{64, 2});
  for (int i = 0; i < 100000; ++i) {
    a.insert(rng.uniform());
    b.insert(rng.uniform() + 0.5);
  }
  CHECK(std::abs(stream_w1d(a, b, 2.0) - 0.25) <= 0.05);
}

TEST_CASE("one-sided streaming 1DW stays near the exact empirical value", "[dist1d]") {
  Rng rng(12);
  Sketch a(SketchConfig{64, 5});
  std::vector<double> all;
  for (int i = 0; i < 100000; ++i) {
    const double x = rng.normal();
    a.insert(x);
    all.push_back(x);
  }
  std::vector<double> small(500);
  for (auto& y : small) y = rng.normal();
  const auto nu = WeightedDiscrete1D::empirical(small);
  const double exact = wasserstein1d_pp(WeightedDiscrete1D::empirical(all), nu, 2.0);
  const double streamed = one_sided_stream_w1d(a, nu, 2.0);
  CHECK(streamed <= 3.0 * exact);
  CHECK(streamed >= exact / 3.0);
}

TEST_CASE("transport map", "[dist1d]") {
  Rng rng(21);
  std::vector<double> xs(300);
  for (auto& x : xs) x = rng.normal();
  std::vector<double> ys(xs);
  for (auto& y : ys) y += 2.0;
  const auto src = sketch_of(xs, 512);
  const auto dst = sketch_of(ys, 512);

  const TransportMap1D identity(src, src);
  const TransportMap1D shift(src, dst);
  for (double x : xs) {
    REQUIRE(identity(x) == x);
    REQUIRE(shift(x) == x + 2.0);
  }

  const TransportMap1D to_measure(src, WeightedDiscrete1D::empirical(ys));
  for (double x : xs) REQUIRE(to_measure(x) == x + 2.0);

  // Monotone on arbitrary (also off-support) arguments.
  std::vector<double> probes(2000);
  for (auto& p : probes) p = rng.normal() * 3.0;
  std::sort(probes.begin(), probes.end());
  for (std::size_t i = 1; i < probes.size(); ++i) REQUIRE(shift(probes[i - 1]) <= shift(probes[i]));
}

TEST_CASE("sketched transport map tracks the exact one", "[dist1d]") {
  Rng rng(31);
  const std::size_t n = 100000;
  std::vector<double> xs(n), ys(n);
  Sketch sx(SketchConfig{128, 1});
  Sketch sy(SketchConfig{128, 2});
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = rng.normal();
    ys[i] = rng.normal() + 1.0;
    sx.insert(xs[i]);
    sy.insert(ys[i]);
  }
  auto sorted_x = xs;
  auto sorted_y = ys;
  std::sort(sorted_x.begin(), sorted_x.end());
  std::sort(sorted_y.begin(), sorted_y.end());
  const TransportMap1D sketched(sx, sy);
  double deviation = 0.0;
  for (std::size_t i = 0; i < n; ++i) deviation += std::abs(sketched(sorted_x[i]) - sorted_y[i]);
  CHECK(deviation / static_cast<double>(n) <= 0.1);
}
