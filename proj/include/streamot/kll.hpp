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

#ifndef STREAMOT_KLL_HPP_
#define STREAMOT_KLL_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "streamot/weighted.hpp"

namespace streamot {

struct SketchConfig {
  /// Capacity parameter of the top compactor. Must be at least 2.
  std::uint32_t k = 200;
  /// Drives the compaction coin flips.
  std::uint64_t seed = 0;
};

/// Retained items in ascending order with integer cumulative weights.
/// Answers the same cdf/quantile queries as the sketch it came from without
/// re-sorting; this is the form consumed by the sliced estimators.
struct SortedView {
  std::vector<double> values;
  std::vector<std::uint64_t> cumulative;

  std::uint64_t total_weight() const noexcept { return cumulative.empty() ? 0 : cumulative.back(); }
  bool empty() const noexcept { return values.empty(); }

  /// Smallest value whose cumulative weight fraction is >= q, q in (0, 1].
  double quantile(double q) const;
  /// Fraction of weight on values <= y.
  double cdf(double y) const;

  /// View of an unweighted sample (every item has weight one).
  static SortedView of_samples(std::span<const double> samples);
};

/**
 * Randomized mergeable quantile sketch built from a hierarchy of compactors.
 *
 * Level h (0-based here) holds items of weight 2^h. With H levels the
 * capacity of level h is ceil(k * (2/3)^(H-1-h)) + 1. A level that reaches
 * its capacity is sorted and either its even- or its odd-indexed items (one
 * fair coin per compaction) move up one level; if the level holds an odd
 * number of items the largest one stays behind. Creating a new top level
 * shrinks every lower capacity, and any level left at or over its new
 * capacity is compacted in ascending level order.
 *
 * The coin for a compaction is a pure function of (seed, n, index of the
 * compaction within the current insert or merge), so a deserialized sketch
 * continues exactly as the original would have.
 *
 * Not thread-safe: one writer, and no queries while a write is in progress.
 */
class Sketch {
 public:
  static constexpr std::uint16_t kSerialVersion = 1;

  explicit Sketch(SketchConfig config = {});

  const SketchConfig& config() const noexcept { return config_; }
  std::uint32_t k() const noexcept { return config_.k; }

  /// Throws non_finite_input for NaN or infinities.
  void insert(double x);

  /// Folds `other` into this sketch. Throws config_mismatch if k differs.
  void merge(const Sketch& other);

  std::uint64_t n() const noexcept { return n_; }
  bool empty() const noexcept { return n_ == 0; }
  std::size_t num_levels() const noexcept { return levels_.size(); }
  /// Number of stored items across all levels.
  std::size_t num_retained() const noexcept;
  /// Sum over stored items of their weights; equals n() at all times.
  std::uint64_t total_weight() const noexcept;

  std::span<const double> level_items(std::size_t level) const { return levels_.at(level); }
  std::uint32_t level_capacity(std::size_t level) const { return capacities_.at(level); }

  /// Running extrema of the stream. A deserialized sketch reports the
  /// extrema of its retained items, since the byte format does not carry them.
  double min_value() const noexcept { return min_; }
  double max_value() const noexcept { return max_; }

  double cdf(double y) const;
  double quantile(double q) const;
  WeightedDiscrete1D to_weighted() const;
  SortedView sorted_view() const;

  /// Little-endian: "KLLS", u16 version, u32 k, u64 seed, u64 n, u16 H,
  /// then per level u16 h (1-based), u32 count, count x f64.
  std::vector<std::uint8_t> serialize() const;
  static Sketch deserialize(std::span<const std::uint8_t> bytes);

  /// Bit-level equality of configuration, counters and stored items.
  friend bool operator==(const Sketch& a, const Sketch& b);

  /// ceil(k * (2/3)^depth) + 1, evaluated exactly.
  static std::uint32_t capacity_at_depth(std::uint32_t k, std::size_t depth);

 private:
  void recompute_capacities();
  void add_level();
  void compress();
  void compact_level(std::size_t level);
  bool next_coin();

  SketchConfig config_;
  std::vector<std::vector<double>> levels_;
  std::vector<std::uint32_t> capacities_;
  std::uint64_t n_ = 0;
  std::uint64_t events_ = 0;
  double min_ = std::numeric_limits<double>::infinity();
  double max_ = -std::numeric_limits<double>::infinity();
};

/// 3k + 2 (log2(3n / (2k)) + 2): the stored-item bound for n > k.
double retained_bound(std::uint32_t k, std::uint64_t n);

}  // namespace streamot

#endif  // STREAMOT_KLL_HPP_
