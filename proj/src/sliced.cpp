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

#include "streamot/sliced.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "streamot/dist1d.hpp"
#include "streamot/error.hpp"
#include "streamot/random.hpp"
#include "bytes.hpp"
#include "power.hpp"

namespace streamot {

namespace {

constexpr std::string_view kProjectionMagic = "SOTJ";
constexpr std::string_view kCheckpointMagic = "SOTC";

void check_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorCode::invalid_p, "order p must be >= 1");
}

void check_point(std::span<const double> point, std::size_t dim) {
  if (point.size() != dim) {
    throw Error(ErrorCode::dimension_mismatch, "point has dimension " + std::to_string(point.size()) +
                                                   ", expected " + std::to_string(dim));
  }
  for (double v : point) {
    if (!std::isfinite(v)) throw Error(ErrorCode::non_finite_input, "point coordinate is not finite");
  }
}

std::vector<std::size_t> all_indices(std::size_t count) {
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace

// ---------------------------------------------------------------------------
// ProjectionSet
// ---------------------------------------------------------------------------

ProjectionSet ProjectionSet::sample(std::size_t dim, std::size_t count, std::uint64_t seed) {
  if (dim == 0 || count == 0) {
    throw Error(ErrorCode::invalid_argument, "projection set needs d >= 1 and L >= 1");
  }
  Rng rng(seed);
  std::vector<double> dirs(dim * count);
  for (std::size_t l = 0; l < count; ++l) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double g = rng.normal();
        dirs[l * dim + j] = g;
        norm2 += g * g;
      }
    } while (norm2 == 0.0);
  }
  return ProjectionSet(dim, seed, std::move(dirs));
}

ProjectionSet::ProjectionSet(std::size_t dim, std::uint64_t seed, std::vector<double> directions)
    : dim_(dim), seed_(seed), directions_(std::move(directions)) {
  if (dim_ == 0 || directions_.empty() || directions_.size() % dim_ != 0) {
    throw Error(ErrorCode::invalid_argument, "direction data does not match the dimension");
  }
  for (std::size_t l = 0; l < count(); ++l) {
    double* row = directions_.data() + l * dim_;
    double norm2 = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) norm2 += row[j] * row[j];
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
      throw Error(ErrorCode::invalid_argument, "projection direction has zero or non-finite norm");
    }
    const double norm = std::sqrt(norm2);
    for (std::size_t j = 0; j < dim_; ++j) row[j] /= norm;
  }
}

std::vector<std::uint8_t> ProjectionSet::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(22 + 8 * directions_.size());
  detail::put_tag(out, kProjectionMagic);
  detail::put<std::uint16_t>(out, kSerialVersion);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(count()));
  detail::put<std::uint64_t>(out, seed_);
  for (double v : directions_) detail::put<double>(out, v);
  return out;
}

ProjectionSet ProjectionSet::deserialize(std::span<const std::uint8_t> bytes) {
  detail::Reader in(bytes, "projection set");
  in.expect_tag(kProjectionMagic);
  const auto version = in.get<std::uint16_t>();
  if (version != kSerialVersion) {
    throw Error(ErrorCode::version_mismatch, "unsupported projection set version " + std::to_string(version));
  }
  ProjectionSet set;
  set.dim_ = in.get<std::uint32_t>();
  const auto count = in.get<std::uint32_t>();
  set.seed_ = in.get<std::uint64_t>();
  if (set.dim_ == 0 || count == 0) throw Error(ErrorCode::malformed_bytes, "empty projection set");
  const std::size_t total = set.dim_ * static_cast<std::size_t>(count);
  in.need(total * 8);
  set.directions_.resize(total);
  for (auto& v : set.directions_) v = in.get<double>();
  if (in.remaining() != 0) throw Error(ErrorCode::malformed_bytes, "trailing bytes after projection set");
  return set;
}

// ---------------------------------------------------------------------------
// StreamSwEstimator
// ---------------------------------------------------------------------------

StreamSwEstimator::StreamSwEstimator(ProjectionSet projections, EstimatorConfig config)
    : projections_(std::move(projections)), config_(config) {
  check_p(config_.p);
  init_side(a_, config_.mode_a, config_.k1);
  init_side(b_, config_.mode_b, config_.k2);
  scratch_.resize(projections_.count());
}

void StreamSwEstimator::init_side(SideState& s, SideMode mode, std::uint32_t k) {
  s.mode = mode;
  s.count = 0;
  const std::size_t count = projections_.count();
  if (mode == SideMode::sketched) {
    s.sketches.reserve(count);
    for (std::size_t l = 0; l < count; ++l) {
      s.sketches.emplace_back(SketchConfig{k, derive_seed(config_.sketch_seed, l)});
    }
  } else {
    s.exact.resize(count);
  }
}

void StreamSwEstimator::ingest(std::span<const double> point, Side side) {
  check_point(point, projections_.dim());
  SideState& s = state(side);
  const std::size_t count = projections_.count();
  for (std::size_t l = 0; l < count; ++l) scratch_[l] = projections_.project(l, point);
  if (s.mode == SideMode::sketched) {
    for (std::size_t l = 0; l < count; ++l) s.sketches[l].insert(scratch_[l]);
  } else {
    for (std::size_t l = 0; l < count; ++l) s.exact[l].push_back(scratch_[l]);
  }
  ++s.count;
}

void StreamSwEstimator::ingest(const PointCloud& points, Side side) {
  for (std::size_t i = 0; i < points.size(); ++i) ingest(points.row(i), side);
}

const Sketch& StreamSwEstimator::sketch(Side side, std::size_t l) const {
  const SideState& s = state(side);
  if (s.mode != SideMode::sketched) throw Error(ErrorCode::invalid_argument, "side is not sketched");
  return s.sketches.at(l);
}

std::span<const double> StreamSwEstimator::exact_values(Side side, std::size_t l) const {
  const SideState& s = state(side);
  if (s.mode != SideMode::exact) throw Error(ErrorCode::invalid_argument, "side is not exact");
  return s.exact.at(l);
}

SortedView StreamSwEstimator::quantile_view(Side side, std::size_t l) const {
  const SideState& s = state(side);
  if (s.count == 0) throw Error(ErrorCode::empty_input, "estimator side is empty");
  if (s.mode == SideMode::sketched) return s.sketches.at(l).sorted_view();
  return SortedView::of_samples(s.exact.at(l));
}

WeightedDiscrete1D StreamSwEstimator::measure(Side side, std::size_t l) const {
  const SideState& s = state(side);
  if (s.count == 0) throw Error(ErrorCode::empty_input, "estimator side is empty");
  if (s.mode == SideMode::sketched) return s.sketches.at(l).to_weighted();
  return WeightedDiscrete1D::empirical(s.exact.at(l));
}

std::size_t StreamSwEstimator::max_retained(Side side) const {
  const SideState& s = state(side);
  std::size_t best = 0;
  if (s.mode == SideMode::sketched) {
    for (const auto& sk : s.sketches) best = std::max(best, sk.num_retained());
  } else {
    for (const auto& v : s.exact) best = std::max(best, v.size());
  }
  return best;
}

double StreamSwEstimator::estimate() const {
  if (a_.count == 0 || b_.count == 0) {
    throw Error(ErrorCode::empty_input, "empty-side: both sides need at least one point");
  }
  const std::size_t count = projections_.count();
  double total = 0.0;
  for (std::size_t l = 0; l < count; ++l) {
    total += wasserstein1d_pp(measure(Side::a, l), measure(Side::b, l), config_.p);
  }
  return total / static_cast<double>(count);
}

double StreamSwEstimator::estimate_one_sided() const {
  if ((a_.mode == SideMode::exact) == (b_.mode == SideMode::exact)) {
    throw Error(ErrorCode::invalid_argument, "one-sided estimate needs one sketched and one exact side");
  }
  return estimate();
}

std::vector<std::uint8_t> StreamSwEstimator::checkpoint() const {
  if (a_.mode != SideMode::sketched || b_.mode != SideMode::sketched) {
    throw Error(ErrorCode::invalid_argument, "only fully sketched estimators can be checkpointed");
  }
  std::vector<std::uint8_t> out;
  detail::put_tag(out, kCheckpointMagic);
  detail::put<std::uint16_t>(out, kCheckpointVersion);
  detail::put<double>(out, config_.p);
  detail::put<std::uint32_t>(out, config_.k1);
  detail::put<std::uint32_t>(out, config_.k2);
  detail::put<std::uint64_t>(out, config_.sketch_seed);
  detail::put_blob(out, projections_.serialize());
  for (const SideState* s : {&a_, &b_}) {
    for (const auto& sk : s->sketches) detail::put_blob(out, sk.serialize());
  }
  return out;
}

StreamSwEstimator StreamSwEstimator::restore(std::span<const std::uint8_t> bytes) {
  detail::Reader in(bytes, "estimator checkpoint");
  in.expect_tag(kCheckpointMagic);
  const auto version = in.get<std::uint16_t>();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::version_mismatch, "unsupported checkpoint version " + std::to_string(version));
  }
  EstimatorConfig config;
  config.p = in.get<double>();
  config.k1 = in.get<std::uint32_t>();
  config.k2 = in.get<std::uint32_t>();
  config.sketch_seed = in.get<std::uint64_t>();
  auto projections = ProjectionSet::deserialize(in.get_blob());
  StreamSwEstimator est(std::move(projections), config);
  for (SideState* s : {&est.a_, &est.b_}) {
    for (auto& sk : s->sketches) {
      Sketch restored = Sketch::deserialize(in.get_blob());
      if (restored.k() != sk.k()) throw Error(ErrorCode::malformed_bytes, "sketch k does not match header");
      sk = std::move(restored);
    }
    s->count = s->sketches.front().n();
    for (const auto& sk : s->sketches) {
      if (sk.n() != s->count) throw Error(ErrorCode::malformed_bytes, "per-projection counts disagree");
    }
  }
  if (in.remaining() != 0) throw Error(ErrorCode::malformed_bytes, "trailing bytes after checkpoint");
  return est;
}

// ---------------------------------------------------------------------------
// Oracle and gradient
// ---------------------------------------------------------------------------

double exact_sw_mc(const PointCloud& x, const PointCloud& y, const ProjectionSet& projections, double p) {
  check_p(p);
  if (x.empty() || y.empty()) throw Error(ErrorCode::empty_input, "exact SW needs non-empty samples");
  if (x.dim() != projections.dim() || y.dim() != projections.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "sample dimension does not match projections");
  }
  std::vector<double> px(x.size());
  std::vector<double> py(y.size());
  double total = 0.0;
  for (std::size_t l = 0; l < projections.count(); ++l) {
    for (std::size_t i = 0; i < x.size(); ++i) px[i] = projections.project(l, x.row(i));
    for (std::size_t i = 0; i < y.size(); ++i) py[i] = projections.project(l, y.row(i));
    total += wasserstein1d_pp(WeightedDiscrete1D::empirical(px), WeightedDiscrete1D::empirical(py), p);
  }
  return total / static_cast<double>(projections.count());
}

std::vector<double> midrank_quantiles(const SortedView& view, std::size_t n) {
  if (view.empty()) throw Error(ErrorCode::empty_input, "target summary is empty");
  std::vector<double> out(n);
  const double total = static_cast<double>(view.total_weight());
  std::size_t j = 0;
  const std::size_t size = view.values.size();
  for (std::size_t r = 0; r < n; ++r) {
    const double q = (static_cast<double>(r) + 0.5) / static_cast<double>(n);
    const double target = q * total * (1.0 - 1e-12);
    while (j < size && static_cast<double>(view.cumulative[j]) < target) ++j;
    out[r] = j < size ? view.values[j] : view.values.back();
  }
  return out;
}

namespace {

struct RankedProjection {
  std::vector<double> values;
  std::vector<std::size_t> order;
};

void rank_along(const PointCloud& x, const ProjectionSet& projections, std::size_t l, RankedProjection& out) {
  const std::size_t n = x.size();
  out.values.resize(n);
  out.order.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = projections.project(l, x.row(i));
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t a, std::size_t b) { return out.values[a] < out.values[b]; });
}

void check_gradient_inputs(const PointCloud& x, const StreamSwEstimator& target,
                           std::span<const std::size_t> indices) {
  if (x.empty()) throw Error(ErrorCode::empty_input, "source points are empty");
  if (target.count(Side::b) == 0) throw Error(ErrorCode::empty_input, "empty-target: target side has no data");
  if (x.dim() != target.projections().dim()) {
    throw Error(ErrorCode::dimension_mismatch, "source dimension does not match projections");
  }
  if (indices.empty()) throw Error(ErrorCode::invalid_argument, "no projections selected");
  for (std::size_t l : indices) {
    if (l >= target.num_projections()) throw Error(ErrorCode::out_of_range, "projection index out of range");
  }
}

}  // namespace

PointCloud grad_one_sided_sw(const PointCloud& x, const StreamSwEstimator& target,
                             std::span<const std::size_t> projection_indices) {
  check_gradient_inputs(x, target, projection_indices);
  const auto& projections = target.projections();
  const double p = target.config().p;
  const std::size_t n = x.size();
  const std::size_t dim = x.dim();
  PointCloud grad(dim, std::vector<double>(n * dim, 0.0));
  RankedProjection ranked;
  for (std::size_t l : projection_indices) {
    rank_along(x, projections, l, ranked);
    const auto ys = midrank_quantiles(target.quantile_view(Side::b, l), n);
    const auto theta = projections.direction(l);
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t i = ranked.order[r];
      const double g = detail::signed_power_derivative(ranked.values[i] - ys[r], p);
      auto row = grad.row(i);
      for (std::size_t j = 0; j < dim; ++j) row[j] += g * theta[j];
    }
  }
  const double scale = 1.0 / static_cast<double>(projection_indices.size());
  for (auto& v : grad.data()) v *= scale;
  return grad;
}

PointCloud grad_one_sided_sw(const PointCloud& x, const StreamSwEstimator& target) {
  const auto idx = all_indices(target.num_projections());
  return grad_one_sided_sw(x, target, idx);
}

double one_sided_objective(const PointCloud& x, const StreamSwEstimator& target,
                           std::span<const std::size_t> projection_indices) {
  check_gradient_inputs(x, target, projection_indices);
  const double p = target.config().p;
  RankedProjection ranked;
  double total = 0.0;
  for (std::size_t l : projection_indices) {
    rank_along(x, target.projections(), l, ranked);
    const auto ys = midrank_quantiles(target.quantile_view(Side::b, l), x.size());
    for (std::size_t r = 0; r < x.size(); ++r) {
      total += detail::power_cost(ranked.values[ranked.order[r]] - ys[r], p);
    }
  }
  return total / static_cast<double>(projection_indices.size());
}

}  // namespace streamot
