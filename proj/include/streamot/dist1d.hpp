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

#ifndef STREAMOT_DIST1D_HPP_
#define STREAMOT_DIST1D_HPP_

#include <variant>

#include "streamot/kll.hpp"
#include "streamot/weighted.hpp"

namespace streamot {

/// Smallest atom of `m` whose cumulative weight reaches q, q in (0, 1].
double quantile_of(const WeightedDiscrete1D& m, double q);

/**
 * Exact W_p^p between two discrete measures on the line.
 *
 * Walks the merged cumulative-weight breakpoints of both quantile functions
 * (the northwest-corner plan) and sums segment length times |x - y|^p over
 * at most |mu| + |nu| - 1 segments. Throws invalid_p when p < 1.
 */
double wasserstein1d_pp(const WeightedDiscrete1D& mu, const WeightedDiscrete1D& nu, double p);

/// (W_p^p)^(1/p).
double wasserstein1d(const WeightedDiscrete1D& mu, const WeightedDiscrete1D& nu, double p);

/// W_p^p between the measures carried by two sketches.
double stream_w1d(const Sketch& a, const Sketch& b, double p);

/// W_p^p between a sketch's measure and an exactly known measure.
double one_sided_stream_w1d(const Sketch& a, const WeightedDiscrete1D& nu, double p);

/// Monotone map x -> F_target^{-1}(F_source(x)) where either side may be a
/// sketch. Both summaries are materialized at construction, so evaluation
/// does not touch the sketches again.
class TransportMap1D {
 public:
  TransportMap1D(const Sketch& source, const Sketch& target);
  TransportMap1D(const Sketch& source, const WeightedDiscrete1D& target);

  /// Levels below the first source atom map to the smallest target atom.
  double operator()(double x) const;

 private:
  SortedView source_;
  std::variant<SortedView, WeightedDiscrete1D> target_;
};

}  // namespace streamot

#endif  // STREAMOT_DIST1D_HPP_
