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

#include "streamot/gradflow.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "power.hpp"
#include "streamot/error.hpp"
#include "streamot/io.hpp"
#include "streamot/random.hpp"
#include "streamot/sliced.hpp"

namespace streamot {

namespace {

void validate(const PointCloud& source, const PointCloud& target, const FlowConfig& cfg) {
  if (source.empty()) throw Error(ErrorCode::empty_input, "empty-source: no source points");
  if (target.empty()) throw Error(ErrorCode::empty_input, "empty-target: no target points");
  if (source.dim() != target.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "source and target dimensions differ");
  }
  if (cfg.steps < 1) throw Error(ErrorCode::invalid_config, "steps must be >= 1");
  if (!(cfg.step_size > 0.0) || !std::isfinite(cfg.step_size)) {
    throw Error(ErrorCode::invalid_config, "step_size must be positive");
  }
  if (cfg.L < 1) throw Error(ErrorCode::invalid_config, "L must be >= 1");
  if (cfg.eval_every < 1) throw Error(ErrorCode::invalid_config, "eval_every must be >= 1");
  if (!(cfg.p >= 1.0) || !std::isfinite(cfg.p)) throw Error(ErrorCode::invalid_p, "order p must be >= 1");
  if (cfg.resample_per_step > cfg.L) {
    throw Error(ErrorCode::invalid_config, "resample_per_step exceeds L");
  }
  if (cfg.baseline != FlowBaseline::full_sw && cfg.k < 2) {
    throw Error(ErrorCode::invalid_config, "k must be >= 2");
  }
}

// Ranks of the source along one direction, kept between steps. Points move
// little per step, so an insertion pass restores the order cheaply.
struct RankState {
  std::vector<std::uint32_t> order;
  bool initialized = false;
};

void rerank(RankState& state, const std::vector<double>& values) {
  auto before = [&](std::uint32_t a, std::uint32_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  };
  auto& order = state.order;
  if (!state.initialized) {
    order.resize(values.size());
    std::iota(order.begin(), order.end(), std::uint32_t{0});
    std::sort(order.begin(), order.end(), before);
    state.initialized = true;
    return;
  }
  for (std::size_t r = 1; r < order.size(); ++r) {
    const std::uint32_t item = order[r];
    std::size_t s = r;
    while (s > 0 && before(item, order[s - 1])) {
      order[s] = order[s - 1];
      --s;
    }
    order[s] = item;
  }
}

}  // namespace

FlowResult run_flow(const PointCloud& source, const PointCloud& target, const FlowConfig& cfg,
                    const PointCloud* score_target, const FlowObserver& observer) {
  validate(source, target, cfg);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = source.size();
  const std::size_t dim = source.dim();

  EstimatorConfig ecfg;
  ecfg.k1 = std::max<std::uint32_t>(cfg.k, 2);
  ecfg.k2 = ecfg.k1;
  ecfg.p = cfg.p;
  ecfg.sketch_seed = derive_seed(cfg.seed, 1);
  ecfg.mode_a = SideMode::exact;
  ecfg.mode_b = cfg.baseline == FlowBaseline::stream_sw ? SideMode::sketched : SideMode::exact;
  StreamSwEstimator estimator(sample_projections(dim, cfg.L, derive_seed(cfg.seed, 0)), ecfg);

  FlowResult result;
  switch (cfg.baseline) {
    case FlowBaseline::stream_sw:
      estimator.ingest(target, Side::b);
      result.target_retained = estimator.max_retained(Side::b);
      break;
    case FlowBaseline::full_sw:
      estimator.ingest(target, Side::b);
      result.target_retained = target.size();
      break;
    case FlowBaseline::random_sampling: {
      ReservoirSummary reservoir(reservoir_budget(cfg.k, target.size()), dim, derive_seed(cfg.seed, 2));
      for (std::size_t i = 0; i < target.size(); ++i) reservoir.update(target.row(i));
      estimator.ingest(reservoir.retained(), Side::b);
      result.target_retained = reservoir.retained().size();
      break;
    }
  }

  const ProjectionSet& projections = estimator.projections();
  std::vector<std::vector<double>> levels(cfg.L);
  for (std::size_t l = 0; l < cfg.L; ++l) levels[l] = midrank_quantiles(estimator.quantile_view(Side::b, l), n);

  PointCloud x = source;
  PointCloud grad(dim, std::vector<double>(n * dim, 0.0));
  std::vector<RankState> ranks(cfg.L);
  std::vector<double> values(n);
  std::vector<std::size_t> active(cfg.L);
  std::iota(active.begin(), active.end(), std::size_t{0});
  std::vector<std::size_t> pool = active;
  Rng subset_rng(derive_seed(cfg.seed, 3));
  const double p = cfg.p;

  for (std::size_t step = 0; step <= cfg.steps; ++step) {
    if (cfg.resample_per_step > 0) {
      // Partial Fisher-Yates; the chosen indices are then visited in order.
      for (std::size_t i = 0; i < cfg.resample_per_step; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(subset_rng.uniform_index(cfg.L - i));
        std::swap(pool[i], pool[j]);
      }
      active.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(cfg.resample_per_step));
      std::sort(active.begin(), active.end());
    }
    const bool record = step % cfg.eval_every == 0 || step == cfg.steps;
    const bool update = step < cfg.steps;
    if (!record && !update) break;

    std::fill(grad.data().begin(), grad.data().end(), 0.0);
    double objective = 0.0;
    for (std::size_t l : active) {
      const auto theta = projections.direction(l);
      for (std::size_t i = 0; i < n; ++i) values[i] = projections.project(l, x.row(i));
      rerank(ranks[l], values);
      const auto& ys = levels[l];
      const auto& order = ranks[l].order;
      for (std::size_t r = 0; r < n; ++r) {
        const std::size_t i = order[r];
        const double diff = values[i] - ys[r];
        objective += detail::power_cost(diff, p);
        if (update) {
          const double g = detail::signed_power_derivative(diff, p);
          auto row = grad.row(i);
          for (std::size_t j = 0; j < dim; ++j) row[j] += g * theta[j];
        }
      }
    }
    const double count = static_cast<double>(active.size());

    if (record) {
      FlowRecord rec;
      rec.step = step;
      rec.loss = objective / count / static_cast<double>(n);
      const bool score = score_target != nullptr &&
                         (step == cfg.steps || (cfg.score_every > 0 && step % cfg.score_every == 0));
      if (score) rec.w2 = std::sqrt(exact_w2_squared(x, *score_target));
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      result.trace.push_back(rec);
      if (observer) observer(step, x);
    }
    if (!update) break;

    const double scale = 1.0 / count;
    auto& xd = x.data();
    const auto& gd = grad.data();
    for (std::size_t t = 0; t < xd.size(); ++t) xd[t] -= cfg.step_size * (gd[t] * scale);
  }
  result.points = std::move(x);
  return result;
}

double exact_w2_squared(const PointCloud& x, const PointCloud& y, std::size_t max_assignment) {
  if (x.empty() || y.empty()) throw Error(ErrorCode::empty_input, "W2 needs two non-empty clouds");
  if (x.dim() != y.dim()) throw Error(ErrorCode::dimension_mismatch, "W2 clouds differ in dimension");
  const std::size_t nx = x.size();
  const std::size_t ny = y.size();
  const std::size_t size = std::lcm(nx, ny);
  if (size > max_assignment) {
    throw Error(ErrorCode::resource_ceiling,
                "assignment of size " + std::to_string(size) + " exceeds the ceiling");
  }
  const std::size_t dim = x.dim();
  const std::size_t rx = size / nx;
  const std::size_t ry = size / ny;
  auto cost = [&](std::size_t i, std::size_t j) {
    const auto a = x.row(i / rx);
    const auto b = y.row(j / ry);
    double s = 0.0;
    for (std::size_t t = 0; t < dim; ++t) {
      const double d = a[t] - b[t];
      s += d * d;
    }
    return s;
  };

  // Shortest augmenting paths with potentials (rows and columns 1-based,
  // column 0 is the virtual start).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(size + 1, 0.0), v(size + 1, 0.0), minv(size + 1);
  std::vector<std::size_t> match(size + 1, 0), way(size + 1, 0);
  std::vector<char> used(size + 1);
  for (std::size_t i = 1; i <= size; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= size; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= size; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= size; ++j) total += cost(match[j] - 1, j - 1);
  return total / static_cast<double>(size);
}

}  // namespace streamot
