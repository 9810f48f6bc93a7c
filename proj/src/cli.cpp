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

#include "streamot/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include "streamot/changepoint.hpp"
#include "streamot/dist1d.hpp"
#include "streamot/error.hpp"
#include "streamot/gradflow.hpp"
#include "streamot/io.hpp"
#include "streamot/kll.hpp"
#include "streamot/random.hpp"
#include "streamot/sliced.hpp"

namespace streamot {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::resource_ceiling:
      return kExitResource;
    case ErrorCode::invariant_violation:
    case ErrorCode::not_calibrated:
      return kExitInternal;
    case ErrorCode::invalid_config:
    case ErrorCode::invalid_argument:
    case ErrorCode::invalid_p:
    case ErrorCode::out_of_range:
    case ErrorCode::config_mismatch:
      return kExitUsage;
    default:
      return kExitInput;
  }
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
  return out;
}

/// JSON record of a run, written next to the CSV it describes.
void write_manifest(const fs::path& csv, const CLI::App& command, const std::vector<std::uint64_t>& seeds,
                    const std::vector<fs::path>& outputs, double seconds) {
  nlohmann::ordered_json flags = nlohmann::ordered_json::object();
  for (const CLI::Option* opt : command.get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help") continue;
    if (opt->get_expected_max() == 0) {
      flags[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto& results = opt->results();
      std::string joined;
      for (std::size_t i = 0; i < results.size(); ++i) joined += (i ? "," : "") + results[i];
      flags[name] = joined;
    } else {
      flags[name] = opt->get_default_str();
    }
  }
  nlohmann::ordered_json doc;
  doc["command"] = command.get_name();
  doc["flags"] = flags;
  doc["seeds"] = seeds;
  doc["version"] = kVersion;
  doc["wall_clock_seconds"] = seconds;
  std::vector<std::string> names;
  for (const auto& p : outputs) names.push_back(p.string());
  doc["outputs"] = names;
  auto out = open_output(csv.parent_path() / (csv.stem().string() + ".manifest.json"));
  out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// sketch
// ---------------------------------------------------------------------------

struct SketchArgs {
  std::uint32_t k = 200;
  std::uint64_t seed = 0;
  std::string input;
  std::optional<double> query_q;
  std::optional<double> query_cdf;
  bool dump = false;
};

int cmd_sketch(const SketchArgs& a, std::ostream& out) {
  Sketch sketch(SketchConfig{a.k, a.seed});
  for_each_point(a.input, [&](std::span<const double> row) {
    if (row.size() != 1) throw Error(ErrorCode::dimension_mismatch, "sketch input must have one column");
    sketch.insert(row[0]);
  });
  if (a.query_q) {
    out << fmt(sketch.quantile(*a.query_q)) << '\n';
  } else if (a.query_cdf) {
    out << fmt(sketch.cdf(*a.query_cdf)) << '\n';
  } else if (a.dump) {
    const auto measure = sketch.to_weighted();
    out << "value,weight\n";
    for (std::size_t i = 0; i < measure.size(); ++i) {
      out << fmt(measure.values()[i]) << ',' << fmt(measure.weights()[i]) << '\n';
    }
  } else {
    out << "n,retained,levels,min,max\n"
        << sketch.n() << ',' << sketch.num_retained() << ',' << sketch.num_levels() << ','
        << fmt(sketch.min_value()) << ',' << fmt(sketch.max_value()) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// dist
// ---------------------------------------------------------------------------

struct DistArgs {
  std::string a;
  std::string b;
  std::size_t L = 100;
  std::uint32_t k1 = 200;
  std::uint32_t k2 = 200;
  double p = 2.0;
  bool one_sided = false;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_dist(const DistArgs& a, const CLI::App& command, std::ostream& out) {
  const auto start = Clock::now();
  EstimatorConfig cfg;
  cfg.k1 = a.k1;
  cfg.k2 = a.k2;
  cfg.p = a.p;
  cfg.sketch_seed = derive_seed(a.seed, 1);
  cfg.mode_b = a.one_sided ? SideMode::exact : SideMode::sketched;
  std::optional<StreamSwEstimator> est;
  auto feed = [&](const std::string& path, Side side) {
    for_each_point(path, [&](std::span<const double> row) {
      if (!est) est.emplace(sample_projections(row.size(), a.L, derive_seed(a.seed, 0)), cfg);
      est->ingest(row, side);
    });
  };
  feed(a.a, Side::a);
  feed(a.b, Side::b);
  const double swpp = a.one_sided ? est->estimate_one_sided() : est->estimate();
  const double seconds = seconds_since(start);
  std::string csv = "swpp,swp,seconds,retained_a,retained_b\n" + fmt(swpp) + ',' + fmt(std::pow(swpp, 1.0 / a.p)) +
                    ',' + fmt(seconds) + ',' + std::to_string(est->max_retained(Side::a)) + ',' +
                    std::to_string(est->max_retained(Side::b)) + '\n';
  out << csv;
  if (!a.out.empty()) {
    open_output(a.out) << csv;
    write_manifest(a.out, command, {a.seed}, {a.out}, seconds);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

int cmd_bench(BenchConfig cfg, const std::string& dir, const CLI::App& command, std::ostream& out) {
  const auto start = Clock::now();
  cfg.threads = worker_threads();
  const auto rows = run_bench(cfg);
  const fs::path csv = fs::path(dir) / "bench.csv";
  {
    auto file = open_output(csv);
    file << "sweep_value,seed,method,rel_error,retained\n";
    for (const auto& r : rows) {
      file << r.sweep_value << ',' << r.seed << ',' << r.method << ',' << fmt(r.rel_error) << ',' << r.retained
           << '\n';
    }
  }
  std::vector<std::uint64_t> seeds;
  for (std::size_t s = 0; s < cfg.seeds; ++s) seeds.push_back(cfg.seed + s);
  write_manifest(csv, command, seeds, {csv}, seconds_since(start));

  // Median relative error per sweep value and method.
  std::map<std::pair<std::uint64_t, std::string>, std::vector<double>> groups;
  for (const auto& r : rows) groups[{r.sweep_value, r.method}].push_back(r.rel_error);
  out << "sweep_value,method,median_rel_error\n";
  for (auto& [key, errs] : groups) {
    std::sort(errs.begin(), errs.end());
    const std::size_t m = errs.size();
    const double median = m % 2 ? errs[m / 2] : 0.5 * (errs[m / 2 - 1] + errs[m / 2]);
    out << key.first << ',' << key.second << ',' << fmt(median) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// flow
// ---------------------------------------------------------------------------

struct FlowArgs {
  std::string source;
  std::string target;
  std::string out;
  std::string baseline = "stream_sw";
  bool score = false;
  bool snapshots = false;
  FlowConfig cfg;
};

int cmd_flow(FlowArgs a, const CLI::App& command, std::ostream& out) {
  const auto start = Clock::now();
  static const std::map<std::string, FlowBaseline> baselines{{"stream_sw", FlowBaseline::stream_sw},
                                                            {"full_sw", FlowBaseline::full_sw},
                                                            {"random_sampling", FlowBaseline::random_sampling}};
  a.cfg.baseline = baselines.at(a.baseline);
  const PointCloud source = read_points(a.source);
  const PointCloud target = read_points(a.target);
  const fs::path dir(a.out);
  std::vector<fs::path> outputs;
  FlowObserver observer;
  if (a.snapshots) {
    observer = [&](std::size_t step, const PointCloud& points) {
      const fs::path snap = dir / ("snapshot_" + std::to_string(step) + ".csv");
      auto file = open_output(snap);
      write_points_csv(file, points);
      outputs.push_back(snap);
    };
  }
  const auto result = run_flow(source, target, a.cfg, a.score ? &target : nullptr, observer);

  const fs::path trace = dir / "trace.csv";
  {
    auto file = open_output(trace);
    file << "step,loss,w2,seconds\n";
    for (const auto& r : result.trace) {
      file << r.step << ',' << fmt(r.loss) << ',' << fmt(r.w2) << ',' << fmt(r.seconds) << '\n';
    }
  }
  const fs::path final_points = dir / "final.csv";
  {
    auto file = open_output(final_points);
    write_points_csv(file, result.points);
  }
  outputs.insert(outputs.begin(), {trace, final_points});
  write_manifest(trace, command, {a.cfg.seed}, outputs, seconds_since(start));
  const auto& last = result.trace.back();
  out << "step,loss,w2,target_retained\n"
      << last.step << ',' << fmt(last.loss) << ',' << fmt(last.w2) << ',' << result.target_retained << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

struct DetectArgs {
  std::string input;
  std::string out;
  std::string method = "stream_sw";
  DetectorConfig cfg;
};

template <typename Detector>
std::vector<DetectionRow> stream_detection(Detector& detector, const std::string& path) {
  PointCloud prefix;
  std::vector<DetectionRow> rows;
  std::size_t t = 0;
  const std::size_t end = detector.config().calibration_end;
  for_each_point(path, [&](std::span<const double> row) {
    if (t < end) {
      if (t == 0) prefix = PointCloud(row.size());
      prefix.push_back(row);
      if (t + 1 == end) detector.calibrate(prefix);
    } else {
      const auto s = detector.step(row, t);
      if (s.evaluated) rows.push_back({t, s.statistic, detector.threshold(), s.triggered});
    }
    ++t;
  });
  if (!detector.calibrated()) detector.calibrate(prefix);
  return rows;
}

int cmd_detect(const DetectArgs& a, const CLI::App& command, std::ostream& out) {
  const auto start = Clock::now();
  const std::size_t dim = point_file_dim(a.input);
  std::vector<DetectionRow> rows;
  std::optional<std::size_t> trigger;
  double threshold = 0.0;
  if (a.method == "sliding_window") {
    SlidingWindowDetector detector(dim, a.cfg);
    rows = stream_detection(detector, a.input);
    trigger = detector.trigger_index();
    threshold = detector.threshold();
  } else {
    StreamSwDetector detector(dim, a.cfg);
    rows = stream_detection(detector, a.input);
    trigger = detector.trigger_index();
    threshold = detector.threshold();
  }
  if (!a.out.empty()) {
    {
      auto file = open_output(a.out);
      file << "t,statistic,threshold,triggered\n";
      for (const auto& r : rows) {
        file << r.t << ',' << fmt(r.statistic) << ',' << fmt(r.threshold) << ',' << (r.triggered ? 1 : 0) << '\n';
      }
    }
    write_manifest(a.out, command, {a.cfg.seed}, {a.out}, seconds_since(start));
  }
  out << "trigger_index,threshold\n" << (trigger ? std::to_string(*trigger) : "none") << ',' << fmt(threshold) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// pairwise
// ---------------------------------------------------------------------------

struct PairwiseArgs {
  std::string dir;
  std::string out;
  std::size_t L = 100;
  std::uint32_t k = 200;
  double p = 2.0;
  std::uint64_t seed = 0;
};

int cmd_pairwise(const PairwiseArgs& a, const CLI::App& command, std::ostream& out) {
  const auto start = Clock::now();
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".csv" || ext == ".sotp" || ext == ".bin")) files.push_back(entry.path());
  }
  if (files.empty()) throw Error(ErrorCode::empty_input, "no point-cloud files in " + a.dir);
  std::sort(files.begin(), files.end());

  std::optional<ProjectionSet> projections;
  std::vector<std::vector<Sketch>> sketches(files.size());
  for (std::size_t f = 0; f < files.size(); ++f) {
    for_each_point(files[f], [&](std::span<const double> row) {
      if (!projections) projections = sample_projections(row.size(), a.L, derive_seed(a.seed, 0));
      if (row.size() != projections->dim()) {
        throw Error(ErrorCode::dimension_mismatch, files[f].string() + " differs in dimension");
      }
      auto& mine = sketches[f];
      if (mine.empty()) {
        for (std::size_t l = 0; l < a.L; ++l) mine.emplace_back(SketchConfig{a.k, derive_seed(derive_seed(a.seed, 1), l)});
      }
      for (std::size_t l = 0; l < a.L; ++l) mine[l].insert(projections->project(l, row));
    });
  }
  const std::size_t count = files.size();
  std::vector<double> matrix(count * count, 0.0);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) pairs.emplace_back(i, j);
  }
  parallel_for(pairs.size(), worker_threads(), [&](std::size_t idx) {
    const auto [i, j] = pairs[idx];
    double total = 0.0;
    for (std::size_t l = 0; l < a.L; ++l) total += stream_w1d(sketches[i][l], sketches[j][l], a.p);
    matrix[i * count + j] = matrix[j * count + i] = total / static_cast<double>(a.L);
  });

  std::string csv = "name";
  for (const auto& f : files) csv += ',' + f.filename().string();
  csv += '\n';
  for (std::size_t i = 0; i < count; ++i) {
    csv += files[i].filename().string();
    for (std::size_t j = 0; j < count; ++j) csv += ',' + fmt(matrix[i * count + j]);
    csv += '\n';
  }
  if (a.out.empty()) {
    out << csv;
  } else {
    open_output(a.out) << csv;
    write_manifest(a.out, command, {a.seed}, {a.out}, seconds_since(start));
    out << "wrote " << a.out << '\n';
  }
  return kExitOk;
}

std::vector<std::uint64_t> parse_values(const std::string& text) {
  std::vector<std::uint64_t> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + start, text.data() + comma, v);
    if (ec != std::errc() || ptr != text.data() + comma) {
      throw Error(ErrorCode::invalid_argument, "--values expects comma-separated integers");
    }
    values.push_back(v);
    start = comma + 1;
  }
  return values;
}

}  // namespace

// ---------------------------------------------------------------------------
// Benchmark core
// ---------------------------------------------------------------------------

std::vector<std::uint64_t> default_sweep_values(BenchSweep sweep) {
  if (sweep == BenchSweep::k) return {2, 5, 10, 20, 50, 100, 200, 500, 1000};
  return {500, 2000, 5000, 10000, 20000, 50000};
}

double bench_cell_bytes(std::size_t L, std::uint32_t k, std::uint64_t n, std::size_t dim) {
  const double nd = static_cast<double>(n);
  const double per_projection = std::min(retained_bound(k, n), nd);
  const double sketches = 2.0 * static_cast<double>(L) * per_projection * 8.0;
  const double reservoirs = 2.0 * static_cast<double>(reservoir_budget(k, n) * dim) * 8.0;
  const double data = 2.0 * nd * static_cast<double>(dim) * 8.0;
  const double scratch = 4.0 * nd * 8.0;
  return sketches + reservoirs + data + scratch;
}

std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  const auto values = cfg.values.empty() ? default_sweep_values(cfg.sweep) : cfg.values;
  if (values.empty() || cfg.seeds == 0 || cfg.L == 0) {
    throw Error(ErrorCode::invalid_config, "bench needs sweep values, seeds and L");
  }
  struct Cell {
    std::uint64_t n;
    std::uint32_t k;
  };
  std::vector<Cell> cells;
  for (auto v : values) {
    Cell c{cfg.sweep == BenchSweep::n ? v : cfg.n, cfg.sweep == BenchSweep::k ? static_cast<std::uint32_t>(v) : cfg.k};
    if (c.k < 2 || c.n < 1) throw Error(ErrorCode::invalid_config, "bench cells need k >= 2 and n >= 1");
    const double mb = bench_cell_bytes(cfg.L, c.k, c.n, 2) / (1024.0 * 1024.0);
    if (mb > cfg.memory_ceiling_mb) {
      throw Error(ErrorCode::resource_ceiling, "sweep point " + std::to_string(v) + " needs about " + fmt(mb) +
                                                   " MB, over the ceiling of " + fmt(cfg.memory_ceiling_mb) + " MB");
    }
    cells.push_back(c);
  }

  auto data_for = [&](std::uint64_t n, std::uint64_t seed) {
    return gen_mixture_pair(cfg.task == BenchTask::gaussian ? gaussian_pair_spec(n, n, seed)
                                                            : mixture_pair_spec(n, n, seed));
  };

  // Full-sample references, one per distinct (n, seed).
  std::vector<std::uint64_t> ns;
  for (const auto& c : cells) {
    if (std::find(ns.begin(), ns.end(), c.n) == ns.end()) ns.push_back(c.n);
  }
  std::vector<double> reference(ns.size() * cfg.seeds);
  parallel_for(reference.size(), cfg.threads, [&](std::size_t idx) {
    const std::uint64_t n = ns[idx / cfg.seeds];
    const std::uint64_t seed = cfg.seed + idx % cfg.seeds;
    const auto [a, b] = data_for(n, seed);
    reference[idx] = exact_sw_mc(a, b, sample_projections(2, cfg.L, derive_seed(seed, 0)), cfg.p);
  });

  std::vector<BenchRow> rows(cells.size() * cfg.seeds * 2);
  parallel_for(cells.size() * cfg.seeds, cfg.threads, [&](std::size_t idx) {
    const auto& cell = cells[idx / cfg.seeds];
    const std::uint64_t seed = cfg.seed + idx % cfg.seeds;
    const std::size_t n_index = static_cast<std::size_t>(std::find(ns.begin(), ns.end(), cell.n) - ns.begin());
    const double exact = reference[n_index * cfg.seeds + idx % cfg.seeds];
    const auto [a, b] = data_for(cell.n, seed);
    const auto projections = sample_projections(2, cfg.L, derive_seed(seed, 0));

    EstimatorConfig ecfg;
    ecfg.k1 = cell.k;
    ecfg.k2 = cell.k;
    ecfg.p = cfg.p;
    ecfg.sketch_seed = derive_seed(seed, 1);
    StreamSwEstimator est(projections, ecfg);
    est.ingest(a, Side::a);
    est.ingest(b, Side::b);
    const double streamed = est.estimate();

    const std::size_t budget = reservoir_budget(cell.k, cell.n);
    ReservoirSummary ra(budget, 2, derive_seed(seed, 2));
    ReservoirSummary rb(budget, 2, derive_seed(seed, 3));
    for (std::size_t i = 0; i < a.size(); ++i) ra.update(a.row(i));
    for (std::size_t i = 0; i < b.size(); ++i) rb.update(b.row(i));
    const double sampled = exact_sw_mc(ra.retained(), rb.retained(), projections, cfg.p);

    const std::uint64_t value = values[idx / cfg.seeds];
    rows[2 * idx] = {value, seed, "stream_sw", std::abs(streamed - exact) / exact,
                     std::max(est.max_retained(Side::a), est.max_retained(Side::b))};
    rows[2 * idx + 1] = {value, seed, "random_sampling", std::abs(sampled - exact) / exact,
                         std::max(ra.retained().size(), rb.retained().size())};
  });
  return rows;
}

std::size_t worker_threads() {
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("STREAM_OT_THREADS")) {
    std::size_t cap = 0;
    const std::string_view text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), cap);
    if (ec == std::errc() && ptr == text.data() + text.size() && cap > 0) threads = std::min(threads, cap);
  }
  return threads;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Streaming sliced Wasserstein toolkit", "stream-ot"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SketchArgs sk;
  auto* sketch = app.add_subcommand("sketch", "Sketch a one-column stream and query it");
  sketch->add_option("--k", sk.k, "Sketch size parameter")->capture_default_str()->check(CLI::Range(2u, 1u << 30));
  sketch->add_option("--seed", sk.seed, "Compaction seed")->capture_default_str();
  sketch->add_option("--input", sk.input, "CSV or SOTP file with one column")->required();
  auto* qq = sketch->add_option("--query-q", sk.query_q, "Print the quantile at level q in (0, 1]");
  auto* qc = sketch->add_option("--query-cdf", sk.query_cdf, "Print the CDF at y");
  auto* dump = sketch->add_flag("--dump", sk.dump, "Print the weighted support as value,weight");
  qq->excludes(qc)->excludes(dump);
  qc->excludes(dump);

  DistArgs di;
  auto* dist = app.add_subcommand("dist", "Stream-SW between two point streams");
  dist->add_option("--a", di.a, "First stream")->required();
  dist->add_option("--b", di.b, "Second stream")->required();
  dist->add_option("--L", di.L, "Number of projections")->capture_default_str()->check(CLI::PositiveNumber);
  dist->add_option("--k1", di.k1, "Sketch size for a")->capture_default_str()->check(CLI::Range(2u, 1u << 30));
  dist->add_option("--k2", di.k2, "Sketch size for b")->capture_default_str()->check(CLI::Range(2u, 1u << 30));
  dist->add_option("--p", di.p, "Order p >= 1")->capture_default_str();
  dist->add_flag("--one-sided", di.one_sided, "Keep stream b exactly and sketch only a");
  dist->add_option("--seed", di.seed, "Seed for projections and sketches")->capture_default_str();
  dist->add_option("--out", di.out, "Also write the result CSV (and manifest) here");

  BenchConfig bc;
  std::string bench_dir;
  std::string bench_values;
  std::string task = "mixture";
  std::string sweep = "k";
  auto* bench = app.add_subcommand("bench", "Relative-error sweep against the reservoir baseline");
  bench->add_option("--task", task, "gaussian or mixture")
      ->capture_default_str()
      ->check(CLI::IsMember({"gaussian", "mixture"}));
  bench->add_option("--sweep", sweep, "k or n")->capture_default_str()->check(CLI::IsMember({"k", "n"}));
  bench->add_option("--values", bench_values, "Comma-separated sweep grid (default: the standard grid)");
  bench->add_option("--n", bc.n, "Stream length for a k sweep")->capture_default_str();
  bench->add_option("--k", bc.k, "Sketch size for an n sweep")->capture_default_str();
  bench->add_option("--L", bc.L, "Number of projections")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--seeds", bc.seeds, "Seeds per sweep point")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--seed", bc.seed, "First seed")->capture_default_str();
  bench->add_option("--p", bc.p, "Order p >= 1")->capture_default_str();
  bench->add_option("--memory-ceiling-mb", bc.memory_ceiling_mb, "Per-cell memory ceiling")->capture_default_str();
  bench->add_option("--out", bench_dir, "Output directory")->required();

  FlowArgs fl;
  auto* flow = app.add_subcommand("flow", "Euler gradient flow of a source cloud toward a streamed target");
  flow->add_option("--source", fl.source, "Source points")->required();
  flow->add_option("--target", fl.target, "Target stream")->required();
  flow->add_option("--out", fl.out, "Output directory")->required();
  flow->add_option("--steps", fl.cfg.steps, "Euler steps")->capture_default_str()->check(CLI::PositiveNumber);
  flow->add_option("--step-size", fl.cfg.step_size, "Step size")->capture_default_str();
  flow->add_option("--L", fl.cfg.L, "Number of projections")->capture_default_str()->check(CLI::PositiveNumber);
  flow->add_option("--k", fl.cfg.k, "Target sketch size")->capture_default_str();
  flow->add_option("--p", fl.cfg.p, "Order p >= 1")->capture_default_str();
  flow->add_option("--eval-every", fl.cfg.eval_every, "Trace interval")->capture_default_str();
  flow->add_option("--seed", fl.cfg.seed, "Seed")->capture_default_str();
  flow->add_option("--baseline", fl.baseline, "stream_sw, full_sw or random_sampling")
      ->capture_default_str()
      ->check(CLI::IsMember({"stream_sw", "full_sw", "random_sampling"}));
  flow->add_option("--resample", fl.cfg.resample_per_step, "Projections drawn per step from the L (0: all)")
      ->capture_default_str();
  flow->add_flag("--score", fl.score, "Score exact W2 against the full target");
  flow->add_option("--score-every", fl.cfg.score_every, "W2 scoring interval (0: final only)")->capture_default_str();
  flow->add_flag("--snapshots", fl.snapshots, "Write the points at every trace step");

  DetectArgs de;
  auto* detect = app.add_subcommand("detect", "Change-point detection on a point stream");
  detect->add_option("--input", de.input, "Point stream")->required();
  detect->add_option("--out", de.out, "Write t,statistic,threshold,triggered here");
  detect->add_option("--method", de.method, "stream_sw or sliding_window")
      ->capture_default_str()
      ->check(CLI::IsMember({"stream_sw", "sliding_window"}));
  detect->add_option("--window", de.cfg.window, "Sliding window size W")->capture_default_str();
  detect->add_option("--alpha", de.cfg.alpha, "False-alarm level")->capture_default_str();
  detect->add_option("--reps", de.cfg.bootstrap_reps, "Bootstrap repetitions")->capture_default_str();
  detect->add_option("--calibration-end", de.cfg.calibration_end, "Prefix length used to calibrate")
      ->capture_default_str();
  detect->add_option("--subset-size", de.cfg.subset_size, "Bootstrap subset size")->capture_default_str();
  detect->add_option("--L", de.cfg.L, "Number of projections")->capture_default_str();
  detect->add_option("--k", de.cfg.k, "Sketch size")->capture_default_str();
  detect->add_option("--p", de.cfg.p, "Order p >= 1")->capture_default_str();
  detect->add_option("--stride", de.cfg.stride, "Evaluate every this many points")->capture_default_str();
  detect->add_option("--seed", de.cfg.seed, "Seed")->capture_default_str();

  PairwiseArgs pw;
  auto* pairwise = app.add_subcommand("pairwise", "Stream-SW distance matrix over a directory of clouds");
  pairwise->add_option("--dir", pw.dir, "Directory of .csv/.sotp point clouds")->required();
  pairwise->add_option("--out", pw.out, "Matrix CSV (stdout if omitted)");
  pairwise->add_option("--L", pw.L, "Number of projections")->capture_default_str()->check(CLI::PositiveNumber);
  pairwise->add_option("--k", pw.k, "Sketch size")->capture_default_str()->check(CLI::Range(2u, 1u << 30));
  pairwise->add_option("--p", pw.p, "Order p >= 1")->capture_default_str();
  pairwise->add_option("--seed", pw.seed, "Seed")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n";
    const auto parsed = app.get_subcommands();
    err << (parsed.empty() ? app.help() : parsed.front()->help());
    return kExitUsage;
  }

  try {
    if (*sketch) return cmd_sketch(sk, out);
    if (*dist) return cmd_dist(di, *dist, out);
    if (*bench) {
      bc.task = task == "gaussian" ? BenchTask::gaussian : BenchTask::mixture;
      bc.sweep = sweep == "n" ? BenchSweep::n : BenchSweep::k;
      if (!bench_values.empty()) bc.values = parse_values(bench_values);
      return cmd_bench(bc, bench_dir, *bench, out);
    }
    if (*flow) return cmd_flow(fl, *flow, out);
    if (*detect) return cmd_detect(de, *detect, out);
    if (*pairwise) return cmd_pairwise(pw, *pairwise, out);
  } catch (const Error& e) {
    err << "stream-ot: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::bad_alloc&) {
    err << "stream-ot: out of memory\n";
    return kExitResource;
  } catch (const fs::filesystem_error& e) {
    err << "stream-ot: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "stream-ot: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace streamot
