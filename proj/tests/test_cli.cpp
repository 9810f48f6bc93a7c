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

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "streamot/cli.hpp"
#include "streamot/io.hpp"
#include "streamot/kll.hpp"
#include "streamot/random.hpp"

using namespace streamot;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("streamot_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, sep)) out.push_back(field);
  return out;
}

std::vector<std::string> lines(const std::string& text) { return split(text, '\n'); }

PointCloud gaussian_cloud(std::size_t n, std::size_t d, double shift, std::uint64_t seed) {
  Rng rng(seed);
  PointCloud cloud(d, std::vector<double>(n * d));
  for (auto& v : cloud.data()) v = rng.normal() + shift;
  return cloud;
}

}  // namespace

TEST_CASE("sketch command", "[cli]") {
  const auto dir = scratch_dir("sketch");
  {
    std::ofstream f(dir / "four.csv");
    f << "1\n2\n3\n4\n";
  }
  const std::string input = (dir / "four.csv").string();
  auto r = cli({"sketch", "--k", "8", "--input", input, "--query-q", "0.5"});
  CHECK(r.code == 0);
  CHECK(r.out == "2\n");
  r = cli({"sketch", "--k", "8", "--input", input, "--query-cdf", "4"});
  CHECK(std::stod(r.out) == 1.0);
  r = cli({"sketch", "--k", "8", "--input", input, "--dump"});
  CHECK(r.out == "value,weight\n1,0.25\n2,0.25\n3,0.25\n4,0.25\n");

  r = cli({"sketch", "--k", "8"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("--input") != std::string::npos);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(cli({"sketch", "--input", input, "--query-q", "1.5"}).code == kExitUsage);
  CHECK(cli({"sketch", "--input", (dir / "absent.csv").string()}).code == kExitInput);
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  {
    std::ofstream f(dir / "bad.csv");
    f << "1\nnot-a-number\n";
  }
  CHECK(cli({"sketch", "--input", (dir / "bad.csv").string()}).code == kExitInput);
}

TEST_CASE("dist command", "[cli]") {
  const auto dir = scratch_dir("dist");
  write_points(dir / "a.csv", gaussian_cloud(3000, 2, 0.0, 1));
  write_points(dir / "a.sotp", gaussian_cloud(3000, 2, 0.0, 1));
  write_points(dir / "c.csv", gaussian_cloud(30, 3, 0.0, 2));

  auto r = cli({"dist", "--a", (dir / "a.csv").string(), "--b", (dir / "a.sotp").string(), "--L", "20", "--k1", "16",
                "--k2", "16", "--out", (dir / "out" / "d.csv").string()});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "swpp,swp,seconds,retained_a,retained_b");
  const auto fields = split(rows[1]);
  CHECK(std::stod(fields[0]) == 0.0);
  CHECK(std::stod(fields[3]) <= retained_bound(16, 3000));

  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "d.manifest.json"));
  CHECK(manifest["command"] == "dist");
  CHECK(manifest["flags"]["--k1"] == "16");
  CHECK(manifest["flags"]["--one-sided"] == false);
  CHECK(manifest["seeds"][0] == 0);

  r = cli({"dist", "--a", (dir / "a.csv").string(), "--b", (dir / "c.csv").string()});
  CHECK(r.code == kExitInput);
  CHECK(cli({"dist", "--a", (dir / "a.csv").string()}).code == kExitUsage);
  CHECK(cli({"dist", "--a", (dir / "a.csv").string(), "--b", (dir / "a.csv").string(), "--p", "0.5"}).code ==
        kExitUsage);
}

TEST_CASE("dist on the Gaussian-pair fixture", "[cli][slow]") {
  const auto dir = scratch_dir("gauss");
  const auto [a, b] = gen_mixture_pair(gaussian_pair_spec(20000, 20000, 3));
  write_points(dir / "a.sotp", a);
  write_points(dir / "b.sotp", b);
  const auto r = cli({"dist", "--a", (dir / "a.sotp").string(), "--b", (dir / "b.sotp").string(), "--L", "1000",
                      "--k1", "500", "--k2", "500", "--seed", "3"});
  REQUIRE(r.code == 0);
  const double swpp = std::stod(split(lines(r.out)[1])[0]);
  CHECK(std::abs(swpp - 9.0) <= 0.45);
}

TEST_CASE("bench command", "[cli]") {
  const auto dir = scratch_dir("bench");
  auto r = cli({"bench", "--task", "gaussian", "--sweep", "k", "--n", "500", "--L", "4", "--seeds", "10", "--out",
                dir.string()});
  REQUIRE(r.code == 0);
  const auto rows = lines(slurp(dir / "bench.csv"));
  CHECK(rows.front() == "sweep_value,seed,method,rel_error,retained");
  CHECK(rows.size() == 1 + 9 * 10 * 2);
  CHECK(fs::exists(dir / "bench.manifest.json"));

  CHECK(cli({"bench", "--values", "100", "--n", "100000000", "--out", dir.string()}).code == kExitResource);
  CHECK(cli({"bench", "--task", "nope", "--out", dir.string()}).code == kExitUsage);
}

TEST_CASE("bench error falls with k and is reproducible", "[cli]") {
  BenchConfig cfg;
  cfg.task = BenchTask::mixture;
  cfg.values = {10, 1000};
  cfg.n = 10000;
  cfg.L = 100;
  cfg.seeds = 10;
  const auto rows = run_bench(cfg);
  auto median = [&](std::uint64_t k) {
    std::vector<double> errs;
    for (const auto& row : rows) {
      if (row.sweep_value == k && row.method == "stream_sw") errs.push_back(row.rel_error);
    }
    std::sort(errs.begin(), errs.end());
    return 0.5 * (errs[4] + errs[5]);
  };
  CHECK(median(1000) < median(10));

  cfg.values = {20};
  cfg.n = 1000;
  cfg.seeds = 3;
  const auto serial = run_bench(cfg);
  cfg.threads = 3;
  const auto parallel = run_bench(cfg);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].rel_error == parallel[i].rel_error);
    CHECK(serial[i].method == parallel[i].method);
  }
}

TEST_CASE("flow command", "[cli]") {
  const auto dir = scratch_dir("flow");
  const auto cloud = gaussian_cloud(100, 2, 0.0, 4);
  write_points(dir / "same.csv", cloud);
  auto r = cli({"flow", "--source", (dir / "same.csv").string(), "--target", (dir / "same.csv").string(), "--steps",
                "20", "--L", "10", "--k", "256", "--eval-every", "5", "--snapshots", "--out", (dir / "run").string()});
  REQUIRE(r.code == 0);
  const auto trace = lines(slurp(dir / "run" / "trace.csv"));
  CHECK(trace.front() == "step,loss,w2,seconds");
  REQUIRE(trace.size() == 6);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(std::stod(split(trace[i])[1]) <= 1e-20);
  CHECK(fs::exists(dir / "run" / "final.csv"));
  CHECK(fs::exists(dir / "run" / "snapshot_10.csv"));
  CHECK(fs::exists(dir / "run" / "trace.manifest.json"));
  CHECK(read_points(dir / "run" / "final.csv") == cloud);

  CHECK(cli({"flow", "--source", (dir / "same.csv").string(), "--target", (dir / "same.csv").string(), "--baseline",
             "bogus", "--out", (dir / "x").string()})
            .code == kExitUsage);
}

TEST_CASE("detect command", "[cli]") {
  const auto dir = scratch_dir("detect");
  PointCloud constant(3);
  for (int t = 0; t < 500; ++t) constant.push_back(std::vector<double>{1.0, 2.0, 3.0});
  write_points(dir / "const.csv", constant);
  auto r = cli({"detect", "--input", (dir / "const.csv").string(), "--reps", "50", "--L", "10", "--out",
                (dir / "rows.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out == "trigger_index,threshold\nnone,0\n");
  const auto rows = lines(slurp(dir / "rows.csv"));
  CHECK(rows.front() == "t,statistic,threshold,triggered");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(split(rows[i])[3] == "0");

  PointCloud short_stream(3);
  for (int t = 0; t < 100; ++t) short_stream.push_back(std::vector<double>{0.0, 0.0, 0.0});
  write_points(dir / "short.csv", short_stream);
  CHECK(cli({"detect", "--input", (dir / "short.csv").string()}).code == kExitInput);
}

TEST_CASE("pairwise command", "[cli]") {
  const auto dir = scratch_dir("pairwise");
  const auto cloud = gaussian_cloud(50, 2, 0.0, 5);
  for (const char* name : {"x.csv", "y.csv", "z.sotp"}) write_points(dir / name, cloud);
  auto r = cli({"pairwise", "--dir", dir.string(), "--L", "8", "--k", "16"});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "name,x.csv,y.csv,z.sotp");
  for (std::size_t i = 1; i < 4; ++i) {
    const auto fields = split(rows[i]);
    REQUIRE(fields.size() == 4);
    for (std::size_t j = 1; j < 4; ++j) CHECK(std::stod(fields[j]) == 0.0);
  }
  write_points(dir / "w.csv", gaussian_cloud(50, 2, 3.0, 6));
  r = cli({"pairwise", "--dir", dir.string(), "--L", "8", "--k", "16"});
  const auto rows2 = lines(r.out);
  CHECK(rows2[0] == "name,w.csv,x.csv,y.csv,z.sotp");
  CHECK(std::stod(split(rows2[1])[2]) > 1.0);
  CHECK(split(rows2[1])[2] == split(rows2[2])[1]);
}
