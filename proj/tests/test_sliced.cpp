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

#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "streamot/error.hpp"
#include "streamot/io.hpp"
#include "streamot/random.hpp"
#include "streamot/sliced.hpp"

using namespace streamot;

namespace {

PointCloud gaussian_cloud(std::size_t n, std::size_t d, double shift, std::uint64_t seed) {
  Rng rng(seed);
  PointCloud cloud(d, std::vector<double>(n * d));
  for (auto& v : cloud.data()) v = rng.normal() + shift;
  return cloud;
}

EstimatorConfig config_with(std::uint32_t k, SideMode a = SideMode::sketched, SideMode b = SideMode::sketched) {
  EstimatorConfig c;
  c.k1 = k;
  c.k2 = k;
  c.p = 2.0;
  c.sketch_seed = 17;
  c.mode_a = a;
  c.mode_b = b;
  return c;
}

}  // namespace

TEST_CASE("projection directions are unit vectors", "[sliced]") {
  const auto set = sample_projections(5, 200, 3);
  for (std::size_t l = 0; l < set.count(); ++l) {
    double norm2 = 0.0;
    for (double v : set.direction(l)) norm2 += v * v;
    REQUIRE(std::abs(std::sqrt(norm2) - 1.0) <= 1e-12);
  }
  const auto line = sample_projections(1, 50, 4);
  for (std::size_t l = 0; l < line.count(); ++l) REQUIRE(std::abs(line.direction(l)[0]) == 1.0);
  CHECK(sample_projections(3, 10, 8) == sample_projections(3, 10, 8));
  CHECK_FALSE(sample_projections(3, 10, 8) == sample_projections(3, 10, 9));
  CHECK_THROWS_AS(sample_projections(0, 10, 1), Error);
}

TEST_CASE("projection directions are isotropic", "[sliced]") {
  const auto set = sample_projections(3, 100000, 12);
  double second_moment[3][3] = {};
  for (std::size_t l = 0; l < set.count(); ++l) {
    const auto t = set.direction(l);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) second_moment[i][j] += t[i] * t[j];
    }
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double mean = second_moment[i][j] / 100000.0;
      CHECK(std::abs(mean - (i == j ? 1.0 / 3.0 : 0.0)) <= 0.02);
    }
  }
}

TEST_CASE("projection set serialization", "[sliced]") {
  const auto set = sample_projections(4, 7, 1);
  CHECK(ProjectionSet::deserialize(set.serialize()) == set);
  auto bytes = set.serialize();
  bytes.pop_back();
  CHECK_THROWS_AS(ProjectionSet::deserialize(bytes), Error);
}

TEST_CASE("ingest updates every projection", "[sliced]") {
  StreamSwEstimator est(sample_projections(2, 20, 1), config_with(16));
  const auto cloud = gaussian_cloud(500, 2, 0.0, 2);
  est.ingest(cloud, Side::a);
  for (std::size_t l = 0; l < 20; ++l) CHECK(est.sketch(Side::a, l).total_weight() == 500);
  CHECK(est.count(Side::a) == 500);

  StreamSwEstimator zero(sample_projections(2, 5, 1), config_with(16));
  const std::vector<double> origin{0.0, 0.0};
  zero.ingest(origin, Side::b);
  for (std::size_t l = 0; l < 5; ++l) CHECK(zero.sketch(Side::b, l).quantile(1.0) == 0.0);

  const std::vector<double> three{1.0, 2.0, 3.0};
  try {
    est.ingest(three, Side::a);
    FAIL("expected dimension mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::dimension_mismatch);
  }
  const std::vector<double> bad{1.0, NAN};
  CHECK_THROWS_AS(est.ingest(bad, Side::a), Error);
  CHECK_THROWS_AS(est.estimate(), Error);  // side b empty
}

TEST_CASE("estimate is zero on identical streams and exact without compaction", "[sliced]") {
  const auto projections = sample_projections(3, 50, 5);
  const auto x = gaussian_cloud(2000, 3, 0.0, 6);
  const auto y = gaussian_cloud(1500, 3, 0.7, 7);

  StreamSwEstimator same(projections, config_with(32));
  same.ingest(x, Side::a);
  same.ingest(x, Side::b);
  CHECK(same.estimate() == 0.0);

  StreamSwEstimator roomy(projections, config_with(4096));
  roomy.ingest(x, Side::a);
  roomy.ingest(y, Side::b);
  const double exact = exact_sw_mc(x, y, projections, 2.0);
  CHECK(std::abs(roomy.estimate() - exact) <= 1e-10);

  // Point masses reduce to the mean of |theta.(x - y)|^p.
  const PointCloud px(3, {1.0, 2.0, 3.0});
  const PointCloud py(3, {-1.0, 0.5, 2.0});
  double expected = 0.0;
  for (std::size_t l = 0; l < projections.count(); ++l) {
    const auto t = projections.direction(l);
    const double dot = t[0] * 2.0 + t[1] * 1.5 + t[2] * 1.0;
    expected += std::pow(std::abs(dot), 1.5);
  }
  CHECK(exact_sw_mc(px, py, projections, 1.5) == Catch::Approx(expected / projections.count()).epsilon(1e-12));
  CHECK(exact_sw_mc(x, x, projections, 2.0) == 0.0);
}

TEST_CASE("one-sided estimates", "[sliced]") {
  const auto projections = sample_projections(2, 40, 9);
  const auto x = gaussian_cloud(1000, 2, 0.0, 10);
  const auto y = gaussian_cloud(800, 2, 1.0, 11);

  StreamSwEstimator self(projections, config_with(2048, SideMode::sketched, SideMode::exact));
  self.ingest(x, Side::a);
  self.ingest(x, Side::b);
  CHECK(self.estimate_one_sided() == 0.0);

  StreamSwEstimator one(projections, config_with(2048, SideMode::sketched, SideMode::exact));
  StreamSwEstimator two(projections, config_with(2048));
  one.ingest(x, Side::a);
  one.ingest(y, Side::b);
  two.ingest(x, Side::a);
  two.ingest(y, Side::b);
  CHECK(std::abs(one.estimate_one_sided() - two.estimate()) <= 1e-10);
  CHECK_THROWS_AS(two.estimate_one_sided(), Error);
}

TEST_CASE("one-sided estimate recovers the Gaussian-pair closed form", "[sliced][slow]") {
  // Side b (N((2,2), I)) is sketched with k = 500; side a is kept exactly.
  // Population SW_2^2 = |(3,3)|^2 / 2 = 9.
  auto setup = gaussian_pair_spec(10000, 100000, 5);
  const auto [a, b] = gen_mixture_pair(setup);
  StreamSwEstimator est(sample_projections(2, 1000, 77), config_with(500, SideMode::exact, SideMode::sketched));
  est.ingest(a, Side::a);
  est.ingest(b, Side::b);
  const double value = est.estimate_one_sided();
  CHECK(value >= 8.55);
  CHECK(value <= 9.45);
}

TEST_CASE("checkpoint round trip", "[sliced]") {
  StreamSwEstimator est(sample_projections(3, 12, 2), config_with(20));
  est.ingest(gaussian_cloud(3000, 3, 0.0, 1), Side::a);
  est.ingest(gaussian_cloud(2000, 3, 1.0, 2), Side::b);
  const auto restored = StreamSwEstimator::restore(est.checkpoint());
  CHECK(restored.estimate() == est.estimate());
  CHECK(restored.count(Side::b) == 2000);
  for (std::size_t l = 0; l < 12; ++l) CHECK(restored.sketch(Side::a, l) == est.sketch(Side::a, l));

  StreamSwEstimator exact(sample_projections(3, 2, 2), config_with(20, SideMode::exact));
  CHECK_THROWS_AS(exact.checkpoint(), Error);
}

TEST_CASE("midrank quantiles agree with pointwise queries", "[sliced]") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Sketch s(SketchConfig{static_cast<std::uint32_t>(4 + rng.uniform_index(60)), rng.next_u64()});
    const std::size_t m = 1 + rng.uniform_index(5000);
    for (std::size_t i = 0; i < m; ++i) s.insert(rng.normal());
    const auto view = s.sorted_view();
    const std::size_t n = 1 + rng.uniform_index(300);
    const auto ys = midrank_quantiles(view, n);
    for (std::size_t r = 0; r < n; ++r) {
      REQUIRE(ys[r] == s.quantile((static_cast<double>(r) + 0.5) / static_cast<double>(n)));
    }
  }
}

TEST_CASE("gradient vanishes at the optimum", "[sliced]") {
  const auto target = gaussian_cloud(200, 2, 1.0, 3);
  StreamSwEstimator est(sample_projections(2, 30, 4), config_with(1024, SideMode::exact, SideMode::sketched));
  est.ingest(target, Side::b);
  const auto grad = grad_one_sided_sw(target, est);
  for (double g : grad.data()) REQUIRE(std::abs(g) <= 1e-12);
}

TEST_CASE("single-point gradient by hand", "[sliced]") {
  const auto projections = sample_projections(2, 1, 8);
  StreamSwEstimator est(projections, config_with(64, SideMode::exact, SideMode::sketched));
  const std::vector<double> targets{-1.0, 0.5, 2.0, 4.0, 9.0};
  for (double t : targets) {
    const std::vector<double> pt{t, -t};
    est.ingest(pt, Side::b);
  }
  const PointCloud x(2, {0.3, 0.9});
  const auto theta = projections.direction(0);
  const double proj = theta[0] * 0.3 + theta[1] * 0.9;
  std::vector<double> projected_targets;
  for (double t : targets) projected_targets.push_back(theta[0] * t - theta[1] * t);
  const double median = oracle::empirical_quantile(projected_targets, 0.5);
  const auto grad = grad_one_sided_sw(x, est);
  CHECK(grad.row(0)[0] == Catch::Approx(2.0 * (proj - median) * theta[0]).epsilon(1e-12));
  CHECK(grad.row(0)[1] == Catch::Approx(2.0 * (proj - median) * theta[1]).epsilon(1e-12));
}

TEST_CASE("gradient matches central finite differences", "[sliced][property]") {
  Rng rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    const double p = trial % 2 == 0 ? 2.0 : 3.0;
    const auto projections = sample_projections(2, 25, rng.next_u64());
    EstimatorConfig cfg = config_with(40, SideMode::exact, SideMode::sketched);
    cfg.p = p;
    StreamSwEstimator est(projections, cfg);
    est.ingest(gaussian_cloud(3000, 2, 1.5, rng.next_u64()), Side::b);
    PointCloud x = gaussian_cloud(16, 2, 0.0, rng.next_u64());
    std::vector<std::size_t> all(25);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto grad = grad_one_sided_sw(x, est, all);
    const double h = 1e-5;
    for (std::size_t k = 0; k < x.data().size(); ++k) {
      const double saved = x.data()[k];
      x.data()[k] = saved + h;
      const double up = one_sided_objective(x, est, all);
      x.data()[k] = saved - h;
      const double down = one_sided_objective(x, est, all);
      x.data()[k] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double denom = std::max({std::abs(fd), std::abs(grad.data()[k]), 1e-6});
      REQUIRE(std::abs(fd - grad.data()[k]) / denom <= 1e-4);
    }
  }
}
