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

#ifndef STREAMOT_SRC_POWER_HPP_
#define STREAMOT_SRC_POWER_HPP_

#include <cmath>

namespace streamot::detail {

/// |diff|^p with exact fast paths for p = 1 and p = 2.
inline double power_cost(double diff, double p) {
  const double a = std::abs(diff);
  if (p == 2.0) return a * a;
  if (p == 1.0) return a;
  return std::pow(a, p);
}

/// d/d diff of |diff|^p, taken as 0 at diff = 0.
inline double signed_power_derivative(double diff, double p) {
  if (p == 2.0) return 2.0 * diff;
  if (diff == 0.0) return 0.0;
  const double mag = p == 1.0 ? 1.0 : p * std::pow(std::abs(diff), p - 1.0);
  return diff > 0.0 ? mag : -mag;
}

}  // namespace streamot::detail

#endif  // STREAMOT_SRC_POWER_HPP_
