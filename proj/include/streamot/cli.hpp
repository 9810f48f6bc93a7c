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

#ifndef STREAMOT_CLI_HPP_
#define STREAMOT_CLI_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace streamot {

inline constexpr const char* kVersion = "0.1.0";

/// Process exit codes of the stream-ot tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitInput = 3,
  kExitResource = 4,
  kExitInternal = 5,
};

/// Runs the tool on argv-style arguments (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------
// Approximation benchmark, shared by the bench command and the test suite.
// ---------------------------------------------------------------------------

enum class BenchTask { gaussian, mixture };
enum class BenchSweep { k, n };

struct BenchConfig {
  BenchTask task = BenchTask::mixture;
  BenchSweep sweep = BenchSweep::k;
  /// Empty selects the default grid of the sweep.
  std::vector<std::uint64_t> values;
  std::uint64_t n = 10000;  // fixed n for a k sweep
  std::uint32_t k = 100;    // fixed k for an n sweep
  std::size_t L = 1000;
  std::size_t seeds = 10;
  std::uint64_t seed = 0;  // seeds used are seed, seed + 1, ...
  double p = 2.0;
  double memory_ceiling_mb = 4096.0;
  std::size_t threads = 1;
};

struct BenchRow {
  std::uint64_t sweep_value = 0;
  std::uint64_t seed = 0;
  std::string method;  // "stream_sw" or "random_sampling"
  double rel_error = 0.0;
  std::size_t retained = 0;
};

std::vector<std::uint64_t> default_sweep_values(BenchSweep sweep);

/// Upper estimate of the bytes one sweep cell holds at once.
double bench_cell_bytes(std::size_t L, std::uint32_t k, std::uint64_t n, std::size_t dim);

/// Rows in (sweep value, seed, method) order with stream_sw before
/// random_sampling. Throws resource_ceiling before doing any work if a cell
/// exceeds the memory ceiling.
std::vector<BenchRow> run_bench(const BenchConfig& config);

/// min(STREAM_OT_THREADS, hardware threads), at least 1.
std::size_t worker_threads();

}  // namespace streamot

#endif  // STREAMOT_CLI_HPP_
