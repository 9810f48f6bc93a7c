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

#include "streamot/io.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "streamot/error.hpp"
#include "bytes.hpp"

namespace streamot {

namespace {

constexpr std::string_view kPointsMagic = "SOTP";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Returns false if any field fails to parse as a finite double.
bool parse_row(std::string_view line, std::vector<double>& out) {
  out.clear();
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    const auto field = trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
      return false;
    }
    out.push_back(value);
    if (comma == std::string_view::npos) return true;
    start = comma + 1;
  }
}

template <typename RowFn>
void for_each_csv_row(std::istream& in, RowFn&& fn) {
  std::string line;
  std::vector<double> row;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty()) continue;
    if (!parse_row(view, row)) {
      if (!seen_data && line_no == 1) continue;  // header
      throw Error(ErrorCode::io_failure, "malformed CSV row " + std::to_string(line_no));
    }
    seen_data = true;
    fn(row, line_no);
  }
}

}  // namespace

PointCloud read_points_csv(std::istream& in) {
  PointCloud cloud;
  bool first = true;
  for_each_csv_row(in, [&](const std::vector<double>& row, std::size_t line_no) {
    if (first) {
      cloud = PointCloud(row.size());
      first = false;
    }
    if (row.size() != cloud.dim()) {
      throw Error(ErrorCode::io_failure, "CSV row " + std::to_string(line_no) + " has " +
                                             std::to_string(row.size()) + " columns, expected " +
                                             std::to_string(cloud.dim()));
    }
    cloud.push_back(row);
  });
  if (first) throw Error(ErrorCode::empty_input, "CSV holds no points");
  return cloud;
}

void write_points_csv(std::ostream& out, const PointCloud& points) {
  char buf[32];
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto row = points.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out.put(',');
      const auto res = std::to_chars(buf, buf + sizeof(buf), row[j]);
      out.write(buf, res.ptr - buf);
    }
    out.put('\n');
  }
}

PointCloud read_points_sotp(std::istream& in) {
  std::vector<std::uint8_t> header(16);
  if (!in.read(reinterpret_cast<char*>(header.data()), 16)) {
    throw Error(ErrorCode::io_failure, "SOTP header truncated");
  }
  detail::Reader hdr(header, "SOTP header");
  hdr.expect_tag(kPointsMagic);
  const auto dim = hdr.get<std::uint32_t>();
  const auto count = hdr.get<std::uint64_t>();
  if (dim == 0) throw Error(ErrorCode::io_failure, "SOTP dimension is zero");
  std::vector<std::uint8_t> body(static_cast<std::size_t>(count) * dim * 8);
  if (!in.read(reinterpret_cast<char*>(body.data()), static_cast<std::streamsize>(body.size()))) {
    throw Error(ErrorCode::io_failure, "SOTP body truncated");
  }
  detail::Reader reader(body, "SOTP body");
  std::vector<double> data(static_cast<std::size_t>(count) * dim);
  for (auto& v : data) {
    v = reader.get<double>();
    if (!std::isfinite(v)) throw Error(ErrorCode::io_failure, "SOTP holds a non-finite coordinate");
  }
  return PointCloud(dim, std::move(data));
}

void write_points_sotp(std::ostream& out, const PointCloud& points) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(16 + points.data().size() * 8);
  detail::put_tag(bytes, kPointsMagic);
  detail::put<std::uint32_t>(bytes, static_cast<std::uint32_t>(points.dim()));
  detail::put<std::uint64_t>(bytes, points.size());
  for (double v : points.data()) detail::put<double>(bytes, v);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

PointCloud read_points(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  const bool binary = in.gcount() == 4 && std::string_view(magic, 4) == kPointsMagic;
  in.clear();
  in.seekg(0);
  return binary ? read_points_sotp(in) : read_points_csv(in);
}

void write_points(const std::filesystem::path& path, const PointCloud& points) {
  const bool binary = path.extension() == ".sotp" || path.extension() == ".bin";
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
  if (binary) {
    write_points_sotp(out, points);
  } else {
    write_points_csv(out, points);
  }
}

std::size_t point_file_dim(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  char header[8] = {};
  in.read(header, 8);
  if (in.gcount() == 8 && std::string_view(header, 4) == kPointsMagic) {
    detail::Reader hdr(std::span(reinterpret_cast<const std::uint8_t*>(header), 8), "SOTP header");
    hdr.expect_tag(kPointsMagic);
    return hdr.get<std::uint32_t>();
  }
  in.clear();
  in.seekg(0);
  std::string line;
  std::vector<double> row;
  while (std::getline(in, line)) {
    if (parse_row(trim(line), row)) return row.size();
  }
  throw Error(ErrorCode::empty_input, path.string() + " holds no points");
}

std::uint64_t for_each_point(const std::filesystem::path& path,
                             const std::function<void(std::span<const double>)>& visit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  char magic[16] = {};
  in.read(magic, 16);
  std::uint64_t visited = 0;
  if (in.gcount() == 16 && std::string_view(magic, 4) == kPointsMagic) {
    detail::Reader hdr(std::span(reinterpret_cast<const std::uint8_t*>(magic), 16), "SOTP header");
    hdr.expect_tag(kPointsMagic);
    const auto dim = hdr.get<std::uint32_t>();
    const auto count = hdr.get<std::uint64_t>();
    if (dim == 0) throw Error(ErrorCode::io_failure, "SOTP dimension is zero");
    std::vector<std::uint8_t> raw(dim * 8);
    std::vector<double> row(dim);
    for (; visited < count; ++visited) {
      if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
        throw Error(ErrorCode::io_failure, "SOTP body truncated");
      }
      detail::Reader reader(raw, "SOTP row");
      for (auto& v : row) {
        v = reader.get<double>();
        if (!std::isfinite(v)) throw Error(ErrorCode::io_failure, "SOTP holds a non-finite coordinate");
      }
      visit(row);
    }
    if (in.peek() != std::char_traits<char>::eof()) throw Error(ErrorCode::io_failure, "trailing bytes after SOTP body");
    return visited;
  }
  in.clear();
  in.seekg(0);
  std::size_t dim = 0;
  for_each_csv_row(in, [&](const std::vector<double>& row, std::size_t line_no) {
    if (dim == 0) dim = row.size();
    if (row.size() != dim) {
      throw Error(ErrorCode::io_failure, "CSV row " + std::to_string(line_no) + " has " +
                                             std::to_string(row.size()) + " columns, expected " +
                                             std::to_string(dim));
    }
    visit(row);
    ++visited;
  });
  if (visited == 0) throw Error(ErrorCode::empty_input, path.string() + " holds no points");
  return visited;
}

WeightedDiscrete1D read_weighted_csv(std::istream& in) {
  std::vector<std::pair<double, double>> atoms;
  for_each_csv_row(in, [&](const std::vector<double>& row, std::size_t line_no) {
    if (row.size() != 2) {
      throw Error(ErrorCode::io_failure, "weighted CSV row " + std::to_string(line_no) + " needs value,weight");
    }
    atoms.emplace_back(row[0], row[1]);
  });
  if (atoms.empty()) throw Error(ErrorCode::empty_input, "weighted CSV holds no atoms");
  return WeightedDiscrete1D::normalized(std::move(atoms));
}

// ---------------------------------------------------------------------------

SyntheticSpec gaussian_pair_spec(std::size_t n, std::size_t m, std::uint64_t seed) {
  SyntheticSpec setup;
  setup.kind = SyntheticKind::gaussian_pair;
  setup.first = {{1.0, {-1.0, -1.0}, {1.0, 0.0, 0.0, 1.0}}};
  setup.second = {{1.0, {2.0, 2.0}, {1.0, 0.0, 0.0, 1.0}}};
  setup.n = n;
  setup.m = m;
  setup.seed = seed;
  return setup;
}

SyntheticSpec mixture_pair_spec(std::size_t n, std::size_t m, std::uint64_t seed) {
  SyntheticSpec setup;
  setup.kind = SyntheticKind::mixture_pair;
  setup.first = {
      {0.3, {0.0, 0.0}, {0.5, 0.2, 0.2, 0.5}},
      {0.4, {3.0, 3.0}, {0.8, -0.3, -0.3, 0.5}},
      {0.3, {-3.0, 3.0}, {0.6, 0.1, 0.1, 0.6}},
  };
  setup.second = {
      {0.4, {-3.0, -3.0}, {0.7, 0.1, 0.1, 0.7}},
      {0.3, {3.0, -3.0}, {0.5, -0.2, -0.2, 0.5}},
      {0.3, {0.0, 3.0}, {0.6, 0.2, 0.2, 0.6}},
  };
  setup.n = n;
  setup.m = m;
  setup.seed = seed;
  return setup;
}

MixtureSampler::MixtureSampler(Mixture mixture, std::uint64_t seed) : rng_(seed) {
  if (mixture.empty()) throw Error(ErrorCode::invalid_argument, "mixture has no components");
  dim_ = mixture.front().mean.size();
  if (dim_ == 0) throw Error(ErrorCode::invalid_argument, "mixture dimension is zero");
  double total = 0.0;
  for (const auto& c : mixture) {
    if (c.mean.size() != dim_ || c.covariance.size() != dim_ * dim_) {
      throw Error(ErrorCode::dimension_mismatch, "mixture component has inconsistent dimension");
    }
    if (!(c.weight > 0.0)) throw Error(ErrorCode::invalid_argument, "component weights must be positive");
    Eigen::MatrixXd cov(dim_, dim_);
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t col = 0; col < dim_; ++col) cov(r, col) = c.covariance[r * dim_ + col];
    }
    if (!cov.isApprox(cov.transpose(), 1e-12)) {
      throw Error(ErrorCode::invalid_covariance, "covariance is not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::invalid_covariance, "covariance is not positive definite");
    }
    const Eigen::MatrixXd lower = llt.matrixL();
    total += c.weight;
    Factor f{total, c.mean, std::vector<double>(dim_ * dim_)};
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t col = 0; col < dim_; ++col) f.lower[r * dim_ + col] = lower(r, col);
    }
    factors_.push_back(std::move(f));
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::invalid_argument, "component weights must sum to 1");
  z_.resize(dim_);
}

void MixtureSampler::next(std::span<double> out) {
  const double u = rng_.uniform() * factors_.back().cumulative_weight;
  auto it = std::find_if(factors_.begin(), factors_.end(),
                         [u](const Factor& f) { return u < f.cumulative_weight; });
  if (it == factors_.end()) --it;
  for (auto& z : z_) z = rng_.normal();
  for (std::size_t r = 0; r < dim_; ++r) {
    double acc = it->mean[r];
    for (std::size_t c = 0; c <= r; ++c) acc += it->lower[r * dim_ + c] * z_[c];
    out[r] = acc;
  }
}

PointCloud MixtureSampler::draw(std::size_t count) {
  PointCloud cloud(dim_, std::vector<double>(count * dim_));
  for (std::size_t i = 0; i < count; ++i) next(cloud.row(i));
  return cloud;
}

std::vector<double> mixture_mean(const Mixture& mixture) {
  std::vector<double> mean(mixture.front().mean.size(), 0.0);
  for (const auto& c : mixture) {
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += c.weight * c.mean[j];
  }
  return mean;
}

std::pair<PointCloud, PointCloud> gen_mixture_pair(const SyntheticSpec& setup) {
  MixtureSampler first(setup.first, derive_seed(setup.seed, 1));
  MixtureSampler second(setup.second, derive_seed(setup.seed, 2));
  return {first.draw(setup.n), second.draw(setup.m)};
}

// ---------------------------------------------------------------------------

std::size_t reservoir_budget(std::uint32_t k, std::uint64_t n) {
  const double kd = static_cast<double>(k);
  const double budget = 3.0 * kd + 2.0 * std::log(static_cast<double>(n) / (2.0 * kd / 3.0));
  return static_cast<std::size_t>(std::max(1.0, std::ceil(budget)));
}

ReservoirSummary::ReservoirSummary(std::size_t capacity, std::size_t dim, std::uint64_t seed)
    : capacity_(capacity), retained_(dim), rng_(seed) {
  if (capacity_ == 0) throw Error(ErrorCode::invalid_argument, "reservoir capacity must be positive");
  retained_.reserve(capacity_);
}

void ReservoirSummary::update(std::span<const double> point) {
  ++seen_;
  if (retained_.size() < capacity_) {
    retained_.push_back(point);
    return;
  }
  const std::uint64_t slot = rng_.uniform_index(seen_);
  if (slot < capacity_) {
    auto row = retained_.row(static_cast<std::size_t>(slot));
    if (point.size() != row.size()) throw Error(ErrorCode::dimension_mismatch, "point has wrong dimension");
    std::copy(point.begin(), point.end(), row.begin());
  }
}

}  // namespace streamot
