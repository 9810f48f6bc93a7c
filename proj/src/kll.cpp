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

#include "streamot/kll.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "streamot/error.hpp"
#include "streamot/random.hpp"
#include "bytes.hpp"

namespace streamot {

namespace {

using detail::put;
using detail::Reader;

constexpr std::string_view kMagic = "KLLS";

}  // namespace

double SortedView::quantile(double q) const {
  if (values.empty()) throw Error(ErrorCode::empty_sketch, "quantile of an empty summary");
  if (!(q > 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::out_of_range, "quantile level must lie in (0, 1]");
  }
  // Relative slack of 1e-12 absorbs rounding in q (e.g. a cdf value fed
  // back in) without ever skipping a whole unit of integer weight.
  const double target = q * static_cast<double>(total_weight()) * (1.0 - 1e-12);
  const auto it = std::lower_bound(
      cumulative.begin(), cumulative.end(), target,
      [](std::uint64_t c, double t) { return static_cast<double>(c) < t; });
  if (it == cumulative.end()) return values.back();
  return values[static_cast<std::size_t>(it - cumulative.begin())];
}

double SortedView::cdf(double y) const {
  if (values.empty()) throw Error(ErrorCode::empty_sketch, "cdf of an empty summary");
  const auto it = std::upper_bound(values.begin(), values.end(), y);
  if (it == values.begin()) return 0.0;
  const auto below = cumulative[static_cast<std::size_t>(it - values.begin()) - 1];
  return static_cast<double>(below) / static_cast<double>(total_weight());
}

SortedView SortedView::of_samples(std::span<const double> samples) {
  SortedView view;
  view.values.assign(samples.begin(), samples.end());
  std::sort(view.values.begin(), view.values.end());
  view.cumulative.resize(view.values.size());
  for (std::size_t i = 0; i < view.values.size(); ++i) view.cumulative[i] = i + 1;
  return view;
}

std::uint32_t Sketch::capacity_at_depth(std::uint32_t k, std::size_t depth) {
  // ceil(k * 2^depth / 3^depth) with exact integer arithmetic; once the
  // ratio drops to <= 1 the ceiling is 1 for every deeper level.
  unsigned __int128 num = k;
  unsigned __int128 den = 1;
  for (std::size_t i = 0; i < depth; ++i) {
    num *= 2;
    den *= 3;
    if (num <= den) return 2;
  }
  const auto ceil = static_cast<std::uint64_t>((num + den - 1) / den);
  return static_cast<std::uint32_t>(ceil + 1);
}

double retained_bound(std::uint32_t k, std::uint64_t n) {
  const double kd = static_cast<double>(k);
  return 3.0 * kd + 2.0 * (std::log2(3.0 * static_cast<double>(n) / (2.0 * kd)) + 2.0);
}

Sketch::Sketch(SketchConfig config) : config_(config) {
  if (config_.k < 2) {
    throw Error(ErrorCode::invalid_config, "k must be at least 2, got " + std::to_string(config_.k));
  }
  levels_.emplace_back();
  recompute_capacities();
}

void Sketch::recompute_capacities() {
  const std::size_t height = levels_.size();
  capacities_.resize(height);
  for (std::size_t h = 0; h < height; ++h) {
    capacities_[h] = capacity_at_depth(config_.k, height - 1 - h);
  }
}

void Sketch::add_level() {
  levels_.emplace_back();
  recompute_capacities();
}

bool Sketch::next_coin() {
  const std::uint64_t word = mix64(derive_seed(config_.seed, n_) ^ mix64(events_++));
  return (word >> 63) != 0;
}

void Sketch::compact_level(std::size_t level) {
  if (level + 1 == levels_.size()) add_level();
  auto& items = levels_[level];
  std::sort(items.begin(), items.end());
  const std::size_t paired = items.size() & ~std::size_t{1};
  const std::size_t offset = next_coin() ? 1 : 0;
  auto& above = levels_[level + 1];
  above.reserve(above.size() + paired / 2);
  for (std::size_t i = offset; i < paired; i += 2) above.push_back(items[i]);
  if (paired == items.size()) {
    items.clear();
  } else {
    const double largest = items.back();
    items.clear();
    items.push_back(largest);
  }
}

void Sketch::compress() {
  for (;;) {
    std::size_t h = 0;
    while (h < levels_.size() && levels_[h].size() < capacities_[h]) ++h;
    if (h == levels_.size()) return;
    compact_level(h);
  }
}

void Sketch::insert(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::non_finite_input, "sketch input must be finite");
  ++n_;
  if (x < min_) min_ = x;
  if (x > max_) max_ = x;
  levels_[0].push_back(x);
  if (levels_[0].size() >= capacities_[0]) {
    events_ = 0;
    compress();
  }
}

void Sketch::merge(const Sketch& other) {
  if (other.config_.k != config_.k) {
    throw Error(ErrorCode::config_mismatch, "cannot merge sketches with k " +
                                                std::to_string(config_.k) + " and " +
                                                std::to_string(other.config_.k));
  }
  if (other.n_ == 0) return;
  n_ += other.n_;
  min_ = std::min(min_, other.min_);
  max_ = std::max(max_, other.max_);
  if (other.levels_.size() > levels_.size()) {
    levels_.resize(other.levels_.size());
    recompute_capacities();
  }
  for (std::size_t h = 0; h < other.levels_.size(); ++h) {
    levels_[h].insert(levels_[h].end(), other.levels_[h].begin(), other.levels_[h].end());
  }
  events_ = 0;
  compress();
}

std::size_t Sketch::num_retained() const noexcept {
  std::size_t total = 0;
  for (const auto& level : levels_) total += level.size();
  return total;
}

std::uint64_t Sketch::total_weight() const noexcept {
  std::uint64_t total = 0;
  for (std::size_t h = 0; h < levels_.size(); ++h) {
    total += static_cast<std::uint64_t>(levels_[h].size()) << h;
  }
  return total;
}

SortedView Sketch::sorted_view() const {
  if (n_ == 0) throw Error(ErrorCode::empty_sketch, "sketch is empty");
  std::vector<std::pair<double, std::uint64_t>> weighted;
  weighted.reserve(num_retained());
  for (std::size_t h = 0; h < levels_.size(); ++h) {
    const std::uint64_t w = std::uint64_t{1} << h;
    for (double x : levels_[h]) weighted.emplace_back(x, w);
  }
  std::sort(weighted.begin(), weighted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SortedView view;
  view.values.reserve(weighted.size());
  view.cumulative.reserve(weighted.size());
  std::uint64_t running = 0;
  for (const auto& [x, w] : weighted) {
    running += w;
    if (!view.values.empty() && view.values.back() == x) {
      view.cumulative.back() = running;
    } else {
      view.values.push_back(x);
      view.cumulative.push_back(running);
    }
  }
  return view;
}

double Sketch::cdf(double y) const { return sorted_view().cdf(y); }

double Sketch::quantile(double q) const {
  if (n_ == 0) throw Error(ErrorCode::empty_sketch, "sketch is empty");
  return sorted_view().quantile(q);
}

WeightedDiscrete1D Sketch::to_weighted() const {
  if (empty()) throw Error(ErrorCode::empty_sketch, "empty sketch has no measure");
  SortedView view = sorted_view();
  return WeightedDiscrete1D::from_sorted_counts(std::move(view.values), view.cumulative);
}

std::vector<std::uint8_t> Sketch::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(32 + 8 * num_retained() + 6 * levels_.size());
  detail::put_tag(out, kMagic);
  put<std::uint16_t>(out, kSerialVersion);
  put<std::uint32_t>(out, config_.k);
  put<std::uint64_t>(out, config_.seed);
  put<std::uint64_t>(out, n_);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(levels_.size()));
  for (std::size_t h = 0; h < levels_.size(); ++h) {
    put<std::uint16_t>(out, static_cast<std::uint16_t>(h + 1));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(levels_[h].size()));
    for (double x : levels_[h]) put<double>(out, x);
  }
  return out;
}

Sketch Sketch::deserialize(std::span<const std::uint8_t> bytes) {
  Reader in(bytes, "sketch");
  in.expect_tag(kMagic);
  const auto version = in.get<std::uint16_t>();
  if (version != kSerialVersion) {
    throw Error(ErrorCode::version_mismatch, "unsupported sketch version " + std::to_string(version));
  }
  SketchConfig config;
  config.k = in.get<std::uint32_t>();
  config.seed = in.get<std::uint64_t>();
  if (config.k < 2) throw Error(ErrorCode::malformed_bytes, "serialized k below 2");
  Sketch sketch(config);
  sketch.n_ = in.get<std::uint64_t>();
  const auto height = in.get<std::uint16_t>();
  if (height == 0) throw Error(ErrorCode::malformed_bytes, "sketch has no levels");
  sketch.levels_.assign(height, {});
  sketch.recompute_capacities();
  for (std::size_t h = 0; h < height; ++h) {
    if (in.get<std::uint16_t>() != h + 1) throw Error(ErrorCode::malformed_bytes, "level out of order");
    const auto count = in.get<std::uint32_t>();
    if (static_cast<std::size_t>(count) * 8 > in.remaining()) {
      throw Error(ErrorCode::malformed_bytes, "sketch bytes truncated");
    }
    if (count >= sketch.capacities_[h]) throw Error(ErrorCode::malformed_bytes, "level over capacity");
    auto& level = sketch.levels_[h];
    level.resize(count);
    for (auto& x : level) {
      x = in.get<double>();
      if (!std::isfinite(x)) throw Error(ErrorCode::malformed_bytes, "non-finite stored item");
      // The format has no extrema fields; the retained ones stand in.
      sketch.min_ = std::min(sketch.min_, x);
      sketch.max_ = std::max(sketch.max_, x);
    }
  }
  if (in.remaining() != 0) throw Error(ErrorCode::malformed_bytes, "trailing bytes after sketch");
  if (sketch.total_weight() != sketch.n_) {
    throw Error(ErrorCode::malformed_bytes, "stored weights do not add up to n");
  }
  return sketch;
}

bool operator==(const Sketch& a, const Sketch& b) {
  if (a.config_.k != b.config_.k || a.config_.seed != b.config_.seed || a.n_ != b.n_) return false;
  if (a.levels_.size() != b.levels_.size()) return false;
  for (std::size_t h = 0; h < a.levels_.size(); ++h) {
    const auto& x = a.levels_[h];
    const auto& y = b.levels_[h];
    if (x.size() != y.size()) return false;
    if (!x.empty() && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace streamot
