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

#ifndef STREAMOT_SRC_BYTES_HPP_
#define STREAMOT_SRC_BYTES_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>
#include <vector>

#include "streamot/error.hpp"

namespace streamot::detail {

// Little-endian field writer/reader shared by the binary formats.

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::little) {
    out.insert(out.end(), raw, raw + sizeof(T));
  } else {
    for (std::size_t i = sizeof(T); i > 0; --i) out.push_back(raw[i - 1]);
  }
}

inline void put_tag(std::vector<std::uint8_t>& out, std::string_view tag) {
  out.insert(out.end(), tag.begin(), tag.end());
}

inline void put_blob(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> blob) {
  put<std::uint64_t>(out, blob.size());
  out.insert(out.end(), blob.begin(), blob.end());
}

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, const char* what) : bytes_(bytes), what_(what) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint8_t raw[sizeof(T)];
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    } else {
      for (std::size_t i = 0; i < sizeof(T); ++i) raw[i] = bytes_[pos_ + sizeof(T) - 1 - i];
    }
    T value;
    std::memcpy(&value, raw, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  void expect_tag(std::string_view tag) {
    need(tag.size());
    if (std::memcmp(bytes_.data() + pos_, tag.data(), tag.size()) != 0) {
      throw Error(ErrorCode::malformed_bytes, std::string("bad magic in ") + what_);
    }
    pos_ += tag.size();
  }

  std::span<const std::uint8_t> get_blob() {
    const auto len = get<std::uint64_t>();
    need(len);
    auto blob = bytes_.subspan(pos_, len);
    pos_ += len;
    return blob;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t len) const {
    if (len > remaining()) throw Error(ErrorCode::malformed_bytes, std::string(what_) + " truncated");
  }

 private:
  std::span<const std::uint8_t> bytes_;
  const char* what_;
  std::size_t pos_ = 0;
};

}  // namespace streamot::detail

#endif  // STREAMOT_SRC_BYTES_HPP_
