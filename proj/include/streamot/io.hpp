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

#ifndef STREAMOT_IO_HPP_
#define STREAMOT_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "streamot/points.hpp"
#include "streamot/random.hpp"
#include "streamot/weighted.hpp"

namespace streamot {

// ---------------------------------------------------------------------------
// Point-stream formats
// ---------------------------------------------------------------------------

/// CSV with one point per row and d numeric columns. A first row that does
/// not parse as numbers is treated as a header. Blank lines are skipped.
PointCloud read_points_csv(std::istream& in);
void write_points_csv(std::ostream& out, const PointCloud& points);

/// Raw little-endian f64 rows after a 16-byte header: "SOTP", u32 d, u64 count.
PointCloud read_points_sotp(std::istream& in);
void write_points_sotp(std::ostream& out, const PointCloud& points);

/// Dispatches on the first four bytes: "SOTP" means binary, anything else CSV.
PointCloud read_points(const std::filesystem::path& path);
void write_points(const std::filesystem::path& path, const PointCloud& points);

/// Dimension of a point file, from the SOTP header or the first CSV data row.
std::size_t point_file_dim(const std::filesystem::path& path);

/// Reads a point file one row at a time (either format) without holding it
/// in memory. Returns the number of points visited.
std::uint64_t for_each_point(const std::filesystem::path& path,
                             const std::function<void(std::span<const double>)>& visit);

/// Two columns `value,weight`, optional header; weights are rescaled to sum
/// to one.
WeightedDiscrete1D read_weighted_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Synthetic distributions
// ---------------------------------------------------------------------------

struct GaussianComponent {
  double weight = 1.0;
  std::vector<double> mean;
  /// Row-major d x d, symmetric positive definite.
  std::vector<double> covariance;
};

using Mixture = std::vector<GaussianComponent>;

enum class SyntheticKind { gaussian_pair, mixture_pair };

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::mixture_pair;
  Mixture first;
  Mixture second;
  std::size_t n = 10000;
  std::size_t m = 10000;
  std::uint64_t seed = 0;
};

/// N((-1,-1), I) versus N((2,2), I).
SyntheticSpec gaussian_pair_spec(std::size_t n, std::size_t m, std::uint64_t seed);
/// The two three-component planar mixtures used in the approximation study.
SyntheticSpec mixture_pair_spec(std::size_t n, std::size_t m, std::uint64_t seed);

/// Stateful draw-by-draw sampler for a Gaussian mixture (Cholesky factors
/// computed once). Throws invalid_covariance for non-SPD covariances and
/// invalid_argument for weights that do not sum to one.
class MixtureSampler {
 public:
  MixtureSampler(Mixture mixture, std::uint64_t seed);

  std::size_t dim() const noexcept { return dim_; }
  void next(std::span<double> out);
  PointCloud draw(std::size_t count);

 private:
  struct Factor {
    double cumulative_weight;
    std::vector<double> mean;
    std::vector<double> lower;  // row-major Cholesky factor
  };

  std::size_t dim_ = 0;
  std::vector<Factor> factors_;
  Rng rng_;
  std::vector<double> z_;
};

/// Mean of a mixture, sum_i w_i mu_i.
std::vector<double> mixture_mean(const Mixture& mixture);

/// Streams A and B from independent seeds derived from setup.seed.
std::pair<PointCloud, PointCloud> gen_mixture_pair(const SyntheticSpec& setup);

// ---------------------------------------------------------------------------
// Reservoir baseline
// ---------------------------------------------------------------------------

/// ceil(3k + 2 ln(n / (2k/3))): the retained-sample budget of the random
/// sampling baseline, matched to the sketch's stored-item bound.
std::size_t reservoir_budget(std::uint32_t k, std::uint64_t n);

/// Uniform fixed-capacity subsample of a point stream (Algorithm R).
class ReservoirSummary {
 public:
  ReservoirSummary(std::size_t capacity, std::size_t dim, std::uint64_t seed);

  void update(std::span<const double> point);

  std::size_t capacity() const noexcept { return capacity_; }
  std::uint64_t items_seen() const noexcept { return seen_; }
  const PointCloud& retained() const noexcept { return retained_; }

 private:
  std::size_t capacity_;
  std::uint64_t seen_ = 0;
  PointCloud retained_;
  Rng rng_;
};

}  // namespace streamot

#endif  // STREAMOT_IO_HPP_
