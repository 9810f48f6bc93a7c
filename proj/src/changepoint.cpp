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

#include "streamot/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "streamot/dist1d.hpp"
#include "streamot/error.hpp"
#include "streamot/kll.hpp"
#include "streamot/random.hpp"
#include "streamot/weighted.hpp"

namespace streamot {

namespace {

void validate(const DetectorConfig& c, std::size_t dim) {
  if (dim == 0) throw Error(ErrorCode::invalid_config, "detector dimension must be >= 1");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw Error(ErrorCode::invalid_config, "alpha must lie in (0, 1)");
  if (c.window < 1 || c.bootstrap_reps < 1 || c.subset_size < 1 || c.L < 1 || c.stride < 1) {
    throw Error(ErrorCode::invalid_config, "window, reps, subset size, L and stride must be >= 1");
  }
  if (c.k < 2) throw Error(ErrorCode::invalid_config, "k must be >= 2");
  if (!(c.p >= 1.0) || !std::isfinite(c.p)) throw Error(ErrorCode::invalid_p, "order p must be >= 1");
}

void check_prefix(const PointCloud& prefix, std::size_t dim, std::size_t needed) {
  if (prefix.size() > 0 && prefix.dim() != dim) {
    throw Error(ErrorCode::dimension_mismatch, "prefix dimension does not match the detector");
  }
  if (prefix.size() < needed) {
    throw Error(ErrorCode::insufficient_data, "insufficient-calibration-data: need " + std::to_string(needed) +
                                                  " prefix points, got " + std::to_string(prefix.size()));
  }
}

void check_step(bool calibrated, std::span<const double> point, std::size_t dim, std::size_t t,
                std::size_t calibration_end) {
  if (!calibrated) throw Error(ErrorCode::not_calibrated, "detector must be calibrated before step");
  if (point.size() != dim) throw Error(ErrorCode::dimension_mismatch, "point has the wrong dimension");
  if (t < calibration_end) throw Error(ErrorCode::out_of_range, "step index lies inside the calibration prefix");
}

EstimatorConfig estimator_config(const DetectorConfig& c) {
  EstimatorConfig e;
  e.k1 = c.k;
  e.k2 = c.k;
  e.p = c.p;
  e.sketch_seed = derive_seed(c.seed, 1);
  return e;
}

PointCloud rows_of(const PointCloud& cloud, std::size_t begin, std::size_t end) {
  const auto first = cloud.data().begin() + static_cast<std::ptrdiff_t>(begin * cloud.dim());
  const auto last = cloud.data().begin() + static_cast<std::ptrdiff_t>(end * cloud.dim());
  return PointCloud(cloud.dim(), std::vector<double>(first, last));
}

}  // namespace

double null_threshold(std::span<const double> null_statistics, double alpha) {
  if (null_statistics.empty()) throw Error(ErrorCode::empty_input, "no null statistics");
  return WeightedDiscrete1D::empirical(null_statistics).quantile(1.0 - alpha);
}

// ---------------------------------------------------------------------------
// StreamSwDetector
// ---------------------------------------------------------------------------

StreamSwDetector::StreamSwDetector(std::size_t dim, DetectorConfig config)
    : config_(config),
      dim_(dim),
      estimator_(sample_projections(std::max<std::size_t>(dim, 1), std::max<std::size_t>(config.L, 1),
                                    derive_seed(config.seed, 0)),
                 estimator_config(config)) {
  validate(config_, dim_);
  if (config_.calibration_end < 2 * config_.subset_size) {
    throw Error(ErrorCode::invalid_config, "calibration_end must be at least twice the subset size");
  }
}

double StreamSwDetector::calibrate(const PointCloud& prefix) {
  const std::size_t end = config_.calibration_end;
  check_prefix(prefix, dim_, end);
  const ProjectionSet& projections = estimator_.projections();
  const std::size_t L = projections.count();

  // Project the prefix once; column l holds the prefix along direction l.
  std::vector<double> projected(L * end);
  for (std::size_t i = 0; i < end; ++i) {
    const auto row = prefix.row(i);
    for (std::size_t l = 0; l < L; ++l) projected[l * end + i] = projections.project(l, row);
  }

  const std::size_t m = config_.subset_size;
  std::vector<std::size_t> pool(end);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(derive_seed(config_.seed, 2));
  null_.assign(config_.bootstrap_reps, 0.0);
  for (std::size_t rep = 0; rep < config_.bootstrap_reps; ++rep) {
    for (std::size_t i = 0; i < 2 * m; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(end - i));
      std::swap(pool[i], pool[j]);
    }
    const std::uint64_t rep_seed = derive_seed(derive_seed(config_.seed, 3), rep);
    double total = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const double* column = projected.data() + l * end;
      const std::uint64_t s = derive_seed(rep_seed, l);
      Sketch first(SketchConfig{config_.k, s});
      Sketch second(SketchConfig{config_.k, s});
      for (std::size_t i = 0; i < m; ++i) {
        first.insert(column[pool[i]]);
        second.insert(column[pool[m + i]]);
      }
      total += stream_w1d(first, second, config_.p);
    }
    null_[rep] = total / static_cast<double>(L);
  }
  threshold_ = null_threshold(null_, config_.alpha);

  estimator_ = StreamSwEstimator(projections, estimator_config(config_));
  for (std::size_t i = 0; i < end; ++i) estimator_.ingest(prefix.row(i), Side::a);
  trigger_.reset();
  calibrated_ = true;
  return threshold_;
}

std::uint64_t StreamSwDetector::post_count() const { return estimator_.count(Side::b); }

double StreamSwDetector::statistic() const {
  if (!calibrated_) throw Error(ErrorCode::not_calibrated, "detector must be calibrated first");
  return estimator_.estimate();
}

DetectorStep StreamSwDetector::step(std::span<const double> point, std::size_t t) {
  check_step(calibrated_, point, dim_, t, config_.calibration_end);
  estimator_.ingest(point, Side::b);
  DetectorStep out;
  const std::uint64_t count = estimator_.count(Side::b);
  if (count >= config_.subset_size && count % config_.stride == 0) {
    out.evaluated = true;
    out.statistic = estimator_.estimate();
    if (!trigger_ && out.statistic > threshold_) trigger_ = t;
  }
  out.triggered = trigger_.has_value();
  return out;
}

// ---------------------------------------------------------------------------
// SlidingWindowDetector
// ---------------------------------------------------------------------------

SlidingWindowDetector::SlidingWindowDetector(std::size_t dim, DetectorConfig config)
    : config_(config),
      dim_(dim),
      projections_(sample_projections(std::max<std::size_t>(dim, 1), std::max<std::size_t>(config.L, 1),
                                      derive_seed(config.seed, 0))) {
  validate(config_, dim_);
  if (config_.calibration_end < 2 * config_.window) {
    throw Error(ErrorCode::invalid_config, "calibration_end must cover two windows");
  }
}

double SlidingWindowDetector::calibrate(const PointCloud& prefix) {
  const std::size_t end = config_.calibration_end;
  const std::size_t w = config_.window;
  check_prefix(prefix, dim_, end);
  Rng rng(derive_seed(config_.seed, 2));
  null_.assign(config_.bootstrap_reps, 0.0);
  for (std::size_t rep = 0; rep < config_.bootstrap_reps; ++rep) {
    const std::size_t s = static_cast<std::size_t>(rng.uniform_index(end - 2 * w + 1));
    null_[rep] = exact_sw_mc(rows_of(prefix, s, s + w), rows_of(prefix, s + w, s + 2 * w), projections_, config_.p);
  }
  threshold_ = null_threshold(null_, config_.alpha);
  buffer_.clear();
  for (std::size_t i = end - 2 * w; i < end; ++i) buffer_.emplace_back(prefix.row(i).begin(), prefix.row(i).end());
  trigger_.reset();
  calibrated_ = true;
  return threshold_;
}

double SlidingWindowDetector::window_statistic() const {
  const std::size_t w = config_.window;
  PointCloud older(dim_), newer(dim_);
  older.reserve(w);
  newer.reserve(w);
  for (std::size_t i = 0; i < w; ++i) older.push_back(buffer_[i]);
  for (std::size_t i = w; i < 2 * w; ++i) newer.push_back(buffer_[i]);
  return exact_sw_mc(older, newer, projections_, config_.p);
}

DetectorStep SlidingWindowDetector::step(std::span<const double> point, std::size_t t) {
  check_step(calibrated_, point, dim_, t, config_.calibration_end);
  for (double v : point) {
    if (!std::isfinite(v)) throw Error(ErrorCode::non_finite_input, "point coordinate is not finite");
  }
  buffer_.pop_front();
  buffer_.emplace_back(point.begin(), point.end());
  DetectorStep out;
  if ((t - config_.calibration_end + 1) % config_.stride == 0) {
    out.evaluated = true;
    out.statistic = window_statistic();
    if (!trigger_ && out.statistic > threshold_) trigger_ = t;
  }
  out.triggered = trigger_.has_value();
  return out;
}

}  // namespace streamot
