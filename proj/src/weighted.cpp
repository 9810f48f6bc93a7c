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

#include "streamot/weighted.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "streamot/error.hpp"

namespace streamot {

WeightedDiscrete1D WeightedDiscrete1D::build(std::vector<std::pair<double, double>> atoms,
                                             bool normalize) {
  if (atoms.empty()) throw Error(ErrorCode::empty_input, "measure has no atoms");
  double total = 0.0;
  for (const auto& [value, weight] : atoms) {
    if (!std::isfinite(value) || !std::isfinite(weight)) {
      throw Error(ErrorCode::non_finite_input, "measure atom is not finite");
    }
    if (weight <= 0.0) throw Error(ErrorCode::invalid_argument, "measure weights must be positive");
    total += weight;
  }
  if (normalize) {
    for (auto& atom : atoms) atom.second /= total;
  } else if (std::abs(total - 1.0) > kMassTolerance) {
    throw Error(ErrorCode::invalid_argument,
                "measure weights sum to " + std::to_string(total) + ", expected 1");
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  WeightedDiscrete1D m;
  m.values_.reserve(atoms.size());
  m.weights_.reserve(atoms.size());
  for (const auto& [value, weight] : atoms) {
    if (!m.values_.empty() && m.values_.back() == value) {
      m.weights_.back() += weight;
    } else {
      m.values_.push_back(value);
      m.weights_.push_back(weight);
    }
  }
  m.cumulative_.resize(m.weights_.size());
  double running = 0.0;
  for (std::size_t i = 0; i < m.weights_.size(); ++i) {
    running += m.weights_[i];
    m.cumulative_[i] = running;
  }
  return m;
}

WeightedDiscrete1D WeightedDiscrete1D::from_pairs(std::vector<std::pair<double, double>> atoms) {
  return build(std::move(atoms), false);
}

WeightedDiscrete1D WeightedDiscrete1D::normalized(std::vector<std::pair<double, double>> atoms) {
  return build(std::move(atoms), true);
}

WeightedDiscrete1D WeightedDiscrete1D::empirical(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorCode::empty_input, "no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  for (double x : sorted) {
    if (!std::isfinite(x)) throw Error(ErrorCode::non_finite_input, "sample is not finite");
  }
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> values;
  std::vector<std::uint64_t> counts;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    values.push_back(sorted[i]);
    counts.push_back(i + 1);
  }
  return from_sorted_counts(std::move(values), counts);
}

WeightedDiscrete1D WeightedDiscrete1D::from_sorted_counts(std::vector<double> values,
                                                          std::span<const std::uint64_t> cumulative) {
  if (values.empty()) throw Error(ErrorCode::empty_input, "measure has no atoms");
  if (values.size() != cumulative.size()) {
    throw Error(ErrorCode::invalid_argument, "values and counts differ in length");
  }
  // Ratios of integers rather than running sums of weights, so equal
  // rational levels from different measures compare equal.
  const double total = static_cast<double>(cumulative.back());
  WeightedDiscrete1D m;
  m.cumulative_.reserve(values.size());
  m.weights_.reserve(values.size());
  std::uint64_t previous = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw Error(ErrorCode::non_finite_input, "measure atom is not finite");
    if (cumulative[i] <= previous || (i > 0 && !(values[i] > values[i - 1]))) {
      throw Error(ErrorCode::invalid_argument, "values or counts are not strictly increasing");
    }
    m.cumulative_.push_back(static_cast<double>(cumulative[i]) / total);
    m.weights_.push_back(static_cast<double>(cumulative[i] - previous) / total);
    previous = cumulative[i];
  }
  m.values_ = std::move(values);
  return m;
}

WeightedDiscrete1D WeightedDiscrete1D::point_mass(double value) {
  return build({{value, 1.0}}, false);
}

double WeightedDiscrete1D::quantile(double q) const {
  if (!(q > 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::out_of_range, "quantile level must lie in (0, 1]");
  }
  // The tolerance absorbs rounding in the running sums so that q = 1 (and
  // levels equal to an exact breakpoint) select the intended atom.
  const double target = q - kMassTolerance;
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) return values_.back();
  return values_[static_cast<std::size_t>(it - cumulative_.begin())];
}

double WeightedDiscrete1D::cdf(double y) const {
  const auto it = std::upper_bound(values_.begin(), values_.end(), y);
  if (it == values_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1];
}

}  // namespace streamot
