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

#ifndef STREAMOT_GRADFLOW_HPP_
#define STREAMOT_GRADFLOW_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "streamot/points.hpp"

namespace streamot {

/// How the flow sees the target.
enum class FlowBaseline {
  stream_sw,        // one sketch per projection
  full_sw,          // every target point kept
  random_sampling,  // reservoir of reservoir_budget(k, m) target points
};

struct FlowConfig {
  std::size_t steps = 5000;
  double step_size = 0.001;
  std::size_t L = 100;
  std::uint32_t k = 200;
  double p = 2.0;
  std::size_t eval_every = 100;
  std::uint64_t seed = 0;
  FlowBaseline baseline = FlowBaseline::stream_sw;
  /// 0: all L projections every step. Otherwise each step uses a fresh
  /// uniform subset of this many of the L summarized projections.
  std::size_t resample_per_step = 0;
  /// Exact W2 is scored on every record whose step is a multiple of this;
  /// 0 scores the final record only. Ignored without a scoring target.
  std::size_t score_every = 0;
};

struct FlowRecord {
  std::size_t step = 0;
  /// Per-point one-sided objective (1/n) mean_l sum_i |theta_l.x_i - y_i|^p
  /// at the start of the step.
  double loss = 0.0;
  /// Exact W2 against the scoring target, NaN when not scored.
  double w2 = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
};

struct FlowResult {
  PointCloud points;
  std::vector<FlowRecord> trace;
  /// Largest number of target scalars (stream_sw, per projection) or target
  /// points (baselines) the flow kept.
  std::size_t target_retained = 0;
};

/// Called after each recorded step with the current points.
using FlowObserver = std::function<void(std::size_t step, const PointCloud& points)>;

/**
 * Euler scheme x <- x - step_size * grad_one_sided_sw(x, target, L).
 *
 * The target is read once, in order, into the baseline's summary before the
 * first step. Records are taken at steps 0, eval_every, 2 eval_every, ...
 * and at `steps` (the final points). `score_target`, when given, is used
 * only for the W2 column.
 */
FlowResult run_flow(const PointCloud& source, const PointCloud& target, const FlowConfig& cfg,
                    const PointCloud* score_target = nullptr, const FlowObserver& observer = {});

/// Squared W2 between the uniform measures on x and y by optimal assignment.
/// Unequal sizes are replicated up to their least common multiple; throws
/// resource_ceiling when that exceeds `max_assignment`.
double exact_w2_squared(const PointCloud& x, const PointCloud& y, std::size_t max_assignment = 6000);

}  // namespace streamot

#endif  // STREAMOT_GRADFLOW_HPP_
