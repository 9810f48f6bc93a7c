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

#ifndef STREAMOT_SLICED_HPP_
#define STREAMOT_SLICED_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "streamot/kll.hpp"
#include "streamot/points.hpp"
#include "streamot/weighted.hpp"

namespace streamot {

/// L unit directions in R^d drawn uniformly from the sphere, plus the seed
/// that produced them. Directions are stored row-major (L x d).
class ProjectionSet {
 public:
  static constexpr std::uint16_t kSerialVersion = 1;

  /// Normalized standard Gaussian draws; bit-identical for equal arguments.
  static ProjectionSet sample(std::size_t dim, std::size_t count, std::uint64_t seed);

  /// Takes explicit directions; each row is renormalized to unit length.
  ProjectionSet(std::size_t dim, std::uint64_t seed, std::vector<double> directions);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return dim_ == 0 ? 0 : directions_.size() / dim_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::span<const double> direction(std::size_t l) const { return {directions_.data() + l * dim_, dim_}; }

  double project(std::size_t l, std::span<const double> point) const {
    const double* theta = directions_.data() + l * dim_;
    double dot = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) dot += theta[j] * point[j];
    return dot;
  }

  /// "SOTJ", u16 version, u32 d, u32 L, u64 seed, L*d f64.
  std::vector<std::uint8_t> serialize() const;
  static ProjectionSet deserialize(std::span<const std::uint8_t> bytes);

  friend bool operator==(const ProjectionSet&, const ProjectionSet&) = default;

 private:
  ProjectionSet() = default;

  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> directions_;
};

inline ProjectionSet sample_projections(std::size_t dim, std::size_t count, std::uint64_t seed) {
  return ProjectionSet::sample(dim, count, seed);
}

enum class Side { a, b };

/// How a side of the estimator holds its projected stream.
enum class SideMode {
  sketched,  // one quantile sketch per projection
  exact,     // every projected value is kept
};

struct EstimatorConfig {
  std::uint32_t k1 = 200;
  std::uint32_t k2 = 200;
  double p = 2.0;
  /// Per-projection sketch seeds are derive_seed(sketch_seed, l) on both
  /// sides, so identical streams give identical sketches.
  std::uint64_t sketch_seed = 0;
  SideMode mode_a = SideMode::sketched;
  SideMode mode_b = SideMode::sketched;
};

/**
 * Streaming sliced Wasserstein estimator.
 *
 * Every ingested point is projected onto all L directions and each scalar
 * goes to the side's per-projection summary. estimate() averages the exact
 * W_p^p between the two per-projection measures over the L directions and
 * returns the SW_p^p estimate (no p-th root).
 */
class StreamSwEstimator {
 public:
  static constexpr std::uint16_t kCheckpointVersion = 1;

  StreamSwEstimator(ProjectionSet projections, EstimatorConfig config);

  void ingest(std::span<const double> point, Side side);
  void ingest(const PointCloud& points, Side side);

  /// Two-sided (or mixed) estimate. Throws empty_input if a side is empty.
  double estimate() const;
  /// Requires exactly one sketched and one exact side.
  double estimate_one_sided() const;

  const ProjectionSet& projections() const noexcept { return projections_; }
  const EstimatorConfig& config() const noexcept { return config_; }
  std::size_t num_projections() const noexcept { return projections_.count(); }

  SideMode mode(Side side) const noexcept { return state(side).mode; }
  std::uint64_t count(Side side) const noexcept { return state(side).count; }

  const Sketch& sketch(Side side, std::size_t l) const;
  std::span<const double> exact_values(Side side, std::size_t l) const;

  /// The side's projection-l measure, as a sorted view or a normalized measure.
  SortedView quantile_view(Side side, std::size_t l) const;
  WeightedDiscrete1D measure(Side side, std::size_t l) const;

  /// Largest number of scalars any one projection of the side keeps.
  std::size_t max_retained(Side side) const;

  /// Both sides must be sketched: "SOTC", u16 version, f64 p, u32 k1,
  /// u32 k2, u64 sketch_seed, then length-prefixed projection set and 2L
  /// length-prefixed sketches (side a first).
  std::vector<std::uint8_t> checkpoint() const;
  static StreamSwEstimator restore(std::span<const std::uint8_t> bytes);

 private:
  struct SideState {
    SideMode mode = SideMode::sketched;
    std::uint64_t count = 0;
    std::vector<Sketch> sketches;
    std::vector<std::vector<double>> exact;
  };

  const SideState& state(Side side) const noexcept { return side == Side::a ? a_ : b_; }
  SideState& state(Side side) noexcept { return side == Side::a ? a_ : b_; }
  void init_side(SideState& s, SideMode mode, std::uint32_t k);

  ProjectionSet projections_;
  EstimatorConfig config_;
  SideState a_;
  SideState b_;
  std::vector<double> scratch_;
};

/// Full-sample Monte Carlo SW_p^p on the given projections (sorting per
/// projection). Oracle and benchmark reference; keeps everything in memory.
double exact_sw_mc(const PointCloud& x, const PointCloud& y, const ProjectionSet& projections, double p);

/**
 * Stochastic gradient of one-sided SW_p^p with respect to the source points.
 *
 * Side b of `target` is the target distribution (sketched or exact). For
 * each selected projection theta, source point i gets mid-rank level
 * q_i = (r_i - 0.5) / n where r_i is its 1-based rank along theta (ties
 * broken by index), y_i = target quantile at q_i, and contributes
 * p |theta.x_i - y_i|^(p-1) sign(theta.x_i - y_i) theta. Contributions are
 * averaged over the selected projections. The result has the shape of x.
 */
PointCloud grad_one_sided_sw(const PointCloud& x, const StreamSwEstimator& target,
                             std::span<const std::size_t> projection_indices);
PointCloud grad_one_sided_sw(const PointCloud& x, const StreamSwEstimator& target);

/// view.quantile((r - 0.5) / n) for r = 1..n, in one merge pass.
std::vector<double> midrank_quantiles(const SortedView& view, std::size_t n);

/// The objective whose gradient grad_one_sided_sw returns (ranks held at
/// their current values): mean over projections of sum_i |theta.x_i - y_i|^p.
double one_sided_objective(const PointCloud& x, const StreamSwEstimator& target,
                           std::span<const std::size_t> projection_indices);

}  // namespace streamot

#endif  // STREAMOT_SLICED_HPP_
