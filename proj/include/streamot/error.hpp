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

#ifndef STREAMOT_ERROR_HPP_
#define STREAMOT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace streamot {

enum class ErrorCode {
  invalid_config,
  invalid_argument,
  non_finite_input,
  empty_sketch,
  empty_input,
  out_of_range,
  config_mismatch,
  dimension_mismatch,
  malformed_bytes,
  version_mismatch,
  invalid_p,
  invalid_covariance,
  not_calibrated,
  insufficient_data,
  io_failure,
  resource_ceiling,
  invariant_violation,
};

const char* to_string(ErrorCode code) noexcept;

/// Every library failure is reported through this type; the code lets
/// callers (notably the CLI) map failures without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::non_finite_input: return "non-finite-input";
    case ErrorCode::empty_sketch: return "empty-sketch";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::out_of_range: return "out-of-range";
    case ErrorCode::config_mismatch: return "config-mismatch";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::malformed_bytes: return "malformed-bytes";
    case ErrorCode::version_mismatch: return "version-mismatch";
    case ErrorCode::invalid_p: return "invalid-p";
    case ErrorCode::invalid_covariance: return "invalid-covariance";
    case ErrorCode::not_calibrated: return "not-calibrated";
    case ErrorCode::insufficient_data: return "insufficient-calibration-data";
    case ErrorCode::io_failure: return "io-failure";
    case ErrorCode::resource_ceiling: return "resource-ceiling";
    case ErrorCode::invariant_violation: return "invariant-violation";
  }
  return "unknown";
}

}  // namespace streamot

#endif  // STREAMOT_ERROR_HPP_
