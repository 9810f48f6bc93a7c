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

#ifndef STREAMOT_CHANGEPOINT_HPP_
#define STREAMOT_CHANGEPOINT_HPP_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "streamot/points.hpp"
#include "streamot/sliced.hpp"

namespace streamot {

struct DetectorConfig {
  std::size_t window = 100;
  double alpha = 0.05;
  std::size_t bootstrap_reps = 1000;
  std::size_t calibration_end = 300;
  /// Size of each bootstrap subset, and the smallest post buffer the
  /// Stream-SW detector evaluates.
  std::size_t subset_size = 100;
  std::size_t L = 100;
  std::uint32_t k = 100;
  double p = 2.0;
  std::uint64_t seed = 0;
  /// The statistic is recomputed every `stride` steps.
  std::size_t stride = 10;
};

struct DetectorStep {
  bool evaluated = false;
  double statistic = 0.0;
  /// Latched: true from the first crossing on.
  bool triggered = false;
};

/// inf-rule (1 - alpha) quantile of the null statistics.
double null_threshold(std::span<const double> null_statistics, double alpha);

/**
 * Stream-SW change detector.
 *
 * calibrate() sketches the prefix [0, calibration_end) as the frozen
 * pre-change summary and bootstraps the null from pairs of disjoint random
 * subsets of that prefix. step() feeds points from calibration_end on into
 * a post-change summary and, every stride steps once it holds subset_size
 * points, compares it with the pre-change summary.
 */
class StreamSwDetector {
 public:
  StreamSwDetector(std::size_t dim, DetectorConfig config);

  /// Uses rows [0, calibration_end) of `prefix`. Returns the threshold.
  double calibrate(const PointCloud& prefix);
  DetectorStep step(std::span<const double> point, std::size_t t);

  /// Current SW_p^p estimate between the pre- and post-change summaries.
  double statistic() const;

  bool calibrated() const noexcept { return calibrated_; }
  double threshold() const noexcept { return threshold_; }
  const std::vector<double>& null_statistics() const noexcept { return null_; }
  std::optional<std::size_t> trigger_index() const noexcept { return trigger_; }
  std::uint64_t post_count() const;
  const DetectorConfig& config() const noexcept { return config_; }

 private:
  DetectorConfig config_;
  std::size_t dim_;
  StreamSwEstimator estimator_;
  std::vector<double> null_;
  double threshold_ = 0.0;
  bool calibrated_ = false;
  std::optional<std::size_t> trigger_;
};

/**
 * Sliding-window baseline: exact SW_p^p between the two most recent
 * consecutive windows of size W. The null comes from random consecutive
 * window pairs inside the prefix; the buffer starts with the last 2W prefix
 * points.
 */
class SlidingWindowDetector {
 public:
  SlidingWindowDetector(std::size_t dim, DetectorConfig config);

  double calibrate(const PointCloud& prefix);
  DetectorStep step(std::span<const double> point, std::size_t t);

  bool calibrated() const noexcept { return calibrated_; }
  double threshold() const noexcept { return threshold_; }
  const std::vector<double>& null_statistics() const noexcept { return null_; }
  std::optional<std::size_t> trigger_index() const noexcept { return trigger_; }
  const DetectorConfig& config() const noexcept { return config_; }

 private:
  double window_statistic() const;

  DetectorConfig config_;
  std::size_t dim_;
  ProjectionSet projections_;
  std::deque<std::vector<double>> buffer_;
  std::vector<double> null_;
  double threshold_ = 0.0;
  bool calibrated_ = false;
  std::optional<std::size_t> trigger_;
};

struct DetectionRow {
  std::size_t t = 0;
  double statistic = 0.0;
  double threshold = 0.0;
  bool triggered = false;
};

/// Calibrates on the stream's prefix, then steps through the rest. Returns
/// one row per evaluated step.
template <typename Detector>
std::vector<DetectionRow> run_detector(Detector& detector, const PointCloud& stream) {
  detector.calibrate(stream);
  std::vector<DetectionRow> rows;
  for (std::size_t t = detector.config().calibration_end; t < stream.size(); ++t) {
    const auto s = detector.step(stream.row(t), t);
    if (s.evaluated) rows.push_back({t, s.statistic, detector.threshold(), s.triggered});
  }
  return rows;
}

}  // namespace streamot

#endif  // STREAMOT_CHANGEPOINT_HPP_
