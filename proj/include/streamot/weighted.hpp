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

#ifndef STREAMOT_WEIGHTED_HPP_
#define STREAMOT_WEIGHTED_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace streamot {

/// A finite probability measure on the real line: atoms sorted strictly
/// ascending, positive weights summing to one (within 1e-12).
class WeightedDiscrete1D {
 public:
  static constexpr double kMassTolerance = 1e-12;

  /// Sorts, merges duplicate values and checks normalization. Throws
  /// invalid_argument on non-positive or non-finite weights, empty input, or
  /// a total mass outside [1 - 1e-12, 1 + 1e-12].
  static WeightedDiscrete1D from_pairs(std::vector<std::pair<double, double>> atoms);

  /// Same as from_pairs but rescales any positive finite total to one.
  static WeightedDiscrete1D normalized(std::vector<std::pair<double, double>> atoms);

  /// Uniform weights over the samples (duplicates merged).
  static WeightedDiscrete1D empirical(std::span<const double> samples);

  static WeightedDiscrete1D point_mass(double value);

  /// Strictly ascending values with integer cumulative counts; weights are
  /// count ratios against the final count.
  static WeightedDiscrete1D from_sorted_counts(std::vector<double> values,
                                               std::span<const std::uint64_t> cumulative);

  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  /// Running sums of weights; cumulative().back() is the total mass.
  const std::vector<double>& cumulative() const noexcept { return cumulative_; }

  /// Smallest atom whose cumulative weight reaches q, for q in (0, 1].
  double quantile(double q) const;

  /// Total weight of atoms <= y.
  double cdf(double y) const;

 private:
  WeightedDiscrete1D() = default;
  static WeightedDiscrete1D build(std::vector<std::pair<double, double>> atoms, bool normalize);

  std::vector<double> values_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

}  // namespace streamot

#endif  // STREAMOT_WEIGHTED_HPP_
