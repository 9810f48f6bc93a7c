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

#include "streamot/dist1d.hpp"

#include <algorithm>
#include <cmath>

#include "power.hpp"
#include "streamot/error.hpp"

namespace streamot {

namespace {

constexpr double kBreakpointTolerance = 1e-15;

}  // namespace

double quantile_of(const WeightedDiscrete1D& m, double q) { return m.quantile(q); }

double wasserstein1d_pp(const WeightedDiscrete1D& mu, const WeightedDiscrete1D& nu, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorCode::invalid_p, "order p must be >= 1");
  const auto& xs = mu.values();
  const auto& ys = nu.values();
  const auto& ca = mu.cumulative();
  const auto& cb = nu.cumulative();

  double total = 0.0;
  double level = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < xs.size() && j < ys.size()) {
    const double next = std::min(ca[i], cb[j]);
    const double length = next - level;
    if (length > 0.0) total += length * detail::power_cost(xs[i] - ys[j], p);
    level = std::max(level, next);
    const bool advance_i = ca[i] <= next + kBreakpointTolerance;
    const bool advance_j = cb[j] <= next + kBreakpointTolerance;
    if (advance_i) ++i;
    if (advance_j) ++j;
  }
  return total;
}

double wasserstein1d(const WeightedDiscrete1D& mu, const WeightedDiscrete1D& nu, double p) {
  return std::pow(wasserstein1d_pp(mu, nu, p), 1.0 / p);
}

double stream_w1d(const Sketch& a, const Sketch& b, double p) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::empty_sketch, "stream_w1d needs non-empty sketches");
  return wasserstein1d_pp(a.to_weighted(), b.to_weighted(), p);
}

double one_sided_stream_w1d(const Sketch& a, const WeightedDiscrete1D& nu, double p) {
  if (a.empty()) throw Error(ErrorCode::empty_sketch, "one_sided_stream_w1d needs a non-empty sketch");
  return wasserstein1d_pp(a.to_weighted(), nu, p);
}

TransportMap1D::TransportMap1D(const Sketch& source, const Sketch& target)
    : source_(source.sorted_view()), target_(target.sorted_view()) {}

TransportMap1D::TransportMap1D(const Sketch& source, const WeightedDiscrete1D& target)
    : source_(source.sorted_view()), target_(target) {}

double TransportMap1D::operator()(double x) const {
  const double level = source_.cdf(x);
  return std::visit(
      [level](const auto& target) -> double {
        if (level <= 0.0) {
          if constexpr (std::is_same_v<std::decay_t<decltype(target)>, SortedView>) {
            return target.values.front();
          } else {
            return target.values().front();
          }
        }
        return target.quantile(std::min(level, 1.0));
      },
      target_);
}

}  // namespace streamot
