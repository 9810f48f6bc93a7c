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

#ifndef STREAMOT_TESTS_ORACLES_HPP_
#define STREAMOT_TESTS_ORACLES_HPP_

// Reference computations used only by the tests. None of them call into the
// library code paths they are used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

/// Fraction of samples <= y, by linear scan.
inline double empirical_cdf(const std::vector<double>& samples, double y) {
  std::size_t count = 0;
  for (double x : samples) count += x <= y ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(samples.size());
}

/// inf{x : F_n(x) >= q} over the sorted sample: element ceil(q n) - 1.
inline double empirical_quantile(std::vector<double> samples, double q) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  auto idx = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  if (idx == 0) idx = 1;
  return samples[std::min(idx, samples.size()) - 1];
}

using Atoms = std::vector<std::pair<double, double>>;

/// Northwest-corner plan on the sorted atoms: repeatedly move
/// min(remaining_i, remaining_j) from the current lowest source atom to the
/// current lowest target atom. Returns the plan cost sum_{ij} gamma_ij |x_i - y_j|^p.
inline double northwest_corner_cost(Atoms a, Atoms b, double p) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::vector<double>> plan(a.size(), std::vector<double>(b.size(), 0.0));
  std::size_t i = 0, j = 0;
  double ra = a.empty() ? 0.0 : a[0].second;
  double rb = b.empty() ? 0.0 : b[0].second;
  while (i < a.size() && j < b.size()) {
    const double moved = std::min(ra, rb);
    plan[i][j] += moved;
    ra -= moved;
    rb -= moved;
    if (ra <= 1e-15) {
      ++i;
      if (i < a.size()) ra = a[i].second;
    }
    if (rb <= 1e-15) {
      ++j;
      if (j < b.size()) rb = b[j].second;
    }
  }
  double cost = 0.0;
  for (std::size_t u = 0; u < a.size(); ++u) {
    for (std::size_t v = 0; v < b.size(); ++v) {
      if (plan[u][v] > 0.0) cost += plan[u][v] * std::pow(std::abs(a[u].first - b[v].first), p);
    }
  }
  return cost;
}

/// W_1 via the CDF-difference integral: sum over consecutive support points
/// of |F_a - F_b| times the gap.
inline double w1_cdf_integral(const Atoms& a, const Atoms& b) {
  std::vector<double> grid;
  for (const auto& [x, w] : a) grid.push_back(x);
  for (const auto& [x, w] : b) grid.push_back(x);
  std::sort(grid.begin(), grid.end());
  auto cdf = [](const Atoms& m, double y) {
    double s = 0.0;
    for (const auto& [x, w] : m) s += x <= y ? w : 0.0;
    return s;
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    total += std::abs(cdf(a, grid[i]) - cdf(b, grid[i])) * (grid[i + 1] - grid[i]);
  }
  return total;
}

/// Exact W_p^p between two equal-size uniform samples: sort both, pair in order.
inline double sorted_pairing_pp(std::vector<double> x, std::vector<double> y, double p) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += std::pow(std::abs(x[i] - y[i]), p);
  return total / static_cast<double>(x.size());
}

/// Minimum over all permutations of (1/n) sum ||x_i - y_sigma(i)||^2 (tiny n only).
inline double brute_force_w2_squared(const std::vector<std::vector<double>>& x,
                                     const std::vector<std::vector<double>>& y) {
  std::vector<std::size_t> perm(x.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = INFINITY;
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = 0; j < x[i].size(); ++j) {
        const double d = x[i][j] - y[perm[i]][j];
        cost += d * d;
      }
    }
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(x.size());
}

}  // namespace oracle

#endif  // STREAMOT_TESTS_ORACLES_HPP_
