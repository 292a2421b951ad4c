// atk — command line front end for the approximate top-k toolkit.
//
// Subcommands: plan, estimate-recall, simulate, bench, grid, mips, model.
// Exit codes: 0 success, 1 usage/validation error, 2 infeasible or empty
// result. Every subcommand is deterministic given --seed (timing values
// excepted). --format csv emits the `config,metric,value,stderr` results
// format, which parses back losslessly.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "atk/csv.hpp"
#include "atk/dataset.hpp"
#include "atk/mips.hpp"
#include "atk/params.hpp"
#include "atk/perf_model.hpp"
#include "atk/planner.hpp"
#include "atk/recall.hpp"
#include "atk/rng.hpp"
#include "atk/simulate.hpp"
#include "atk/threads.hpp"
#include "atk/topk.hpp"

namespace {

using namespace atk;

std::string num(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct CommonOpts {
  std::string format = "table";
  int threads = 0;  // 0: fall back to ATK_THREADS, then 1
};

void add_common(CLI::App* sub, CommonOpts& common) {
  sub->add_option("--format", common.format, "output format")
      ->check(CLI::IsMember({"table", "csv"}))
      ->capture_default_str();
  sub->add_option("--threads", common.threads,
                  "worker threads (default: ATK_THREADS env var, else 1)");
}

void emit(const CommonOpts& common, const std::vector<ResultRow>& rows,
          const std::string& table) {
  if (common.format == "csv")
    std::cout << results_csv_string(rows);
  else
    std::cout << table;
}

std::string describe(const RecallEstimate& est) {
  std::string out = num(est.value) + " method=" + to_string(est.method);
  if (est.std_error) out += " std_error=" + num(*est.std_error, "%.3g");
  if (est.trials) out += " trials=" + std::to_string(*est.trials);
  return out;
}

// ---- plan ------------------------------------------------------------------

struct PlanOpts {
  CommonOpts common;
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  double recall_target = 0.95;
  std::uint32_t max_kprime = 4;
  std::uint32_t lane_multiple = kDefaultLaneMultiple;
  std::uint64_t seed = 0;
};

std::string cand_config(const PlanCandidate& cand) {
  return "kprime=" + std::to_string(cand.local_k) +
         ";b=" + std::to_string(cand.num_buckets);
}

int cmd_plan(const PlanOpts& opt) {
  PlanRequest req;
  req.n = opt.n;
  req.k = opt.k;
  req.recall_target = opt.recall_target;
  req.lane_multiple = opt.lane_multiple;
  req.seed = opt.seed;
  req.allowed_local_k.clear();
  for (std::uint32_t kp = 1; kp <= opt.max_kprime; ++kp)
    req.allowed_local_k.push_back(kp);

  std::vector<PlanCandidate> trace;
  const PlanResult result = select_parameters(req, &trace);

  std::ostringstream table;
  table << "request: n=" << opt.n << " k=" << opt.k
        << " recall_target=" << num(opt.recall_target, "%g")
        << " max_kprime=" << opt.max_kprime
        << " lane_multiple=" << opt.lane_multiple << " seed=" << opt.seed
        << '\n';
  table << "winner: local_k=" << result.local_k
        << " num_buckets=" << result.num_buckets
        << " num_elements=" << result.num_elements << '\n';
  table << "estimated_recall: " << describe(result.estimated_recall) << '\n';
  if (result.high_target_warning)
    table << "warning: recall target " << num(opt.recall_target, "%g")
          << " is at or above 0.995, where Monte Carlo scoring (3*stderr <= "
             "0.005) cannot reliably separate configurations\n";

  std::vector<ResultRow> rows;
  const std::string winner = "winner;kprime=" + std::to_string(result.local_k) +
                             ";b=" + std::to_string(result.num_buckets);
  rows.push_back({winner, "num_elements",
                  static_cast<double>(result.num_elements), std::nullopt});
  rows.push_back({winner, "recall", result.estimated_recall.value,
                  result.estimated_recall.std_error});
  rows.push_back({winner, "high_target_warning",
                  result.high_target_warning ? 1.0 : 0.0, std::nullopt});

  std::size_t passing = 0;
  for (const auto& cand : trace)
    if (cand.passed) ++passing;
  table << "passing candidates (" << passing << "):\n";
  for (const auto& cand : trace) {
    if (!cand.passed) continue;
    table << "  local_k=" << cand.local_k
          << " num_buckets=" << cand.num_buckets << " num_elements="
          << cand.num_buckets * static_cast<std::uint64_t>(cand.local_k)
          << " recall=" << describe(cand.recall) << '\n';
    rows.push_back({"candidate;" + cand_config(cand), "recall",
                    cand.recall.value, cand.recall.std_error});
  }

  emit(opt.common, rows, table.str());
  return 0;
}

// ---- estimate-recall ---------------------------------------------------------

struct EstimateOpts {
  CommonOpts common;
  std::uint64_t n = 0;
  std::uint64_t b = 0;
  std::uint64_t k = 0;
  std::uint32_t kprime = 1;
  std::string method = "exact";
  std::uint64_t trials = 262144;
  std::uint64_t seed = 0;
};

int cmd_estimate_recall(const EstimateOpts& opt) {
  AlgoParams params;
  params.n = opt.n;
  params.num_buckets = opt.b;
  params.global_k = static_cast<std::uint32_t>(opt.k);
  params.local_k = opt.kprime;
  params.lane_multiple = 1;
  if (opt.k > UINT32_MAX)
    throw std::invalid_argument("estimate-recall: k exceeds 2^32 - 1");

  RecallEstimate est;
  if (opt.method == "exact") {
    est = exact_expected_recall(params);
  } else if (opt.method == "mc") {
    est = opt.trials == 0 ? mc_expected_recall_adaptive(params, opt.seed)
                          : mc_expected_recall(params, opt.trials, opt.seed);
  } else if (opt.method == "bound") {
    est = recall_bound_improved(params);
  } else {
    est = recall_bound_quartic(params);
  }

  std::ostringstream table;
  table << "recall: " << describe(est) << '\n';

  std::vector<ResultRow> rows;
  const std::string config =
      "n=" + std::to_string(opt.n) + ";b=" + std::to_string(opt.b) +
      ";k=" + std::to_string(opt.k) + ";kprime=" + std::to_string(opt.kprime) +
      ";method=" + to_string(est.method);
  rows.push_back({config, "recall", est.value, est.std_error});
  if (est.trials)
    rows.push_back({config, "trials", static_cast<double>(*est.trials),
                    std::nullopt});

  emit(opt.common, rows, table.str());
  return 0;
}

// ---- simulate ----------------------------------------------------------------

struct SimulateOpts {
  CommonOpts common;
  std::uint64_t n = 0;
  std::uint64_t b = 0;
  std::uint64_t k = 0;
  std::uint32_t kprime = 1;
  std::uint64_t runs = 1024;
  std::uint64_t seed = 0;
};

int cmd_simulate(const SimulateOpts& opt) {
  AlgoParams params;
  params.n = opt.n;
  params.num_buckets = opt.b;
  params.global_k = static_cast<std::uint32_t>(opt.k);
  params.local_k = opt.kprime;
  params.lane_multiple = 1;
  if (opt.k > UINT32_MAX)
    throw std::invalid_argument("simulate: k exceeds 2^32 - 1");

  const unsigned threads = resolve_thread_count(opt.common.threads);
  const SimStats stats = simulate_recall(params, opt.runs, opt.seed, threads);
  const RecallEstimate exact = exact_expected_recall(params);
  const RecallEstimate mc = mc_expected_recall_adaptive(params, opt.seed);

  std::ostringstream table;
  table << "runs: " << stats.runs << '\n';
  table << "empirical_recall: " << num(stats.mean_recall)
        << " std=" << num(stats.stddev, "%.6g")
        << " std_error=" << num(stats.std_error(), "%.6g") << '\n';
  table << "exact_recall: " << num(exact.value) << '\n';
  table << "mc_recall: " << describe(mc) << '\n';

  const std::string config =
      "n=" + std::to_string(opt.n) + ";b=" + std::to_string(opt.b) +
      ";k=" + std::to_string(opt.k) + ";kprime=" + std::to_string(opt.kprime);
  std::vector<ResultRow> rows;
  rows.push_back({config, "empirical_recall", stats.mean_recall,
                  stats.std_error()});
  rows.push_back({config, "empirical_std", stats.stddev, std::nullopt});
  rows.push_back({config, "exact_recall", exact.value, std::nullopt});
  rows.push_back({config, "mc_recall", mc.value, mc.std_error});

  emit(opt.common, rows, table.str());
  return 0;
}

// ---- bench -------------------------------------------------------------------

struct BenchOpts {
  CommonOpts common;
  std::uint64_t batch = 1;
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  std::uint32_t kprime = 1;
  std::uint64_t b = 0;
  std::uint32_t repeats = 10;
  std::uint32_t warmup = 3;
  bool exact_baseline = false;
  std::uint64_t seed = 0;
};

double quantile(std::vector<double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

int cmd_bench(const BenchOpts& opt) {
  AlgoParams params;
  params.n = opt.n;
  params.num_buckets = opt.b;
  params.global_k = static_cast<std::uint32_t>(opt.k);
  params.local_k = opt.kprime;
  params.lane_multiple = 1;
  params.validate();
  if (opt.batch == 0)
    throw std::invalid_argument("bench: batch must be >= 1");
  if (opt.repeats == 0)
    throw std::invalid_argument("bench: repeats must be >= 1");

  // timing only — any NaN-free values do; synthetic uniform floats
  std::vector<float> data(opt.batch * opt.n);
  Xoshiro256pp rng(opt.seed);
  for (auto& x : data) x = static_cast<float>(rng.next_double());

  using clock = std::chrono::steady_clock;
  const auto ms = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };

  std::vector<double> stage1_ms, stage2_ms, total_ms, exact_ms;
  std::uint32_t sink = 0;  // keeps the timed work observable
  std::vector<TopKResult> grids(opt.batch);
  for (std::uint32_t rep = 0; rep < opt.warmup + opt.repeats; ++rep) {
    const auto t0 = clock::now();
    for (std::uint64_t r = 0; r < opt.batch; ++r)
      grids[r] = stage1_partial_reduce(
          {data.data() + r * opt.n, static_cast<std::size_t>(opt.n)}, params);
    const auto t1 = clock::now();
    for (std::uint64_t r = 0; r < opt.batch; ++r) {
      const TopKResult top = select_top_k_candidates(
          grids[r].values, grids[r].indices,
          static_cast<std::uint32_t>(opt.k), opt.n);
      sink ^= top.indices[0];
    }
    const auto t2 = clock::now();
    if (rep >= opt.warmup) {
      stage1_ms.push_back(ms(t0, t1));
      stage2_ms.push_back(ms(t1, t2));
      total_ms.push_back(ms(t0, t2));
    }
    if (opt.exact_baseline) {
      const auto t3 = clock::now();
      for (std::uint64_t r = 0; r < opt.batch; ++r) {
        const TopKResult top = exact_top_k(
            {data.data() + r * opt.n, static_cast<std::size_t>(opt.n)},
            static_cast<std::uint32_t>(opt.k));
        sink ^= top.indices[0];
      }
      const auto t4 = clock::now();
      if (rep >= opt.warmup) exact_ms.push_back(ms(t3, t4));
    }
  }

  const std::string config =
      "batch=" + std::to_string(opt.batch) + ";n=" + std::to_string(opt.n) +
      ";k=" + std::to_string(opt.k) + ";kprime=" + std::to_string(opt.kprime) +
      ";b=" + std::to_string(opt.b);

  std::ostringstream table;
  table << "config: batch=" << opt.batch << " n=" << opt.n << " k=" << opt.k
        << " kprime=" << opt.kprime << " b=" << opt.b
        << " repeats=" << opt.repeats << " warmup=" << opt.warmup
        << " (checksum " << sink << ")\n";
  std::vector<ResultRow> rows;
  const auto report = [&](const char* name, std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    const double median = quantile(samples, 0.5);
    const double iqr = quantile(samples, 0.75) - quantile(samples, 0.25);
    table << name << ": median=" << num(median, "%.4f")
          << " iqr=" << num(iqr, "%.4f") << '\n';
    // stderr column carries the IQR for bench output
    rows.push_back({config, name, median, iqr});
  };
  report("stage1_ms", stage1_ms);
  report("stage2_ms", stage2_ms);
  report("total_ms", total_ms);
  if (opt.exact_baseline) report("exact_ms", exact_ms);

  emit(opt.common, rows, table.str());
  return 0;
}

// ---- grid --------------------------------------------------------------------

struct GridOpts {
  CommonOpts common;
  double recall_target = 0.95;
  std::uint32_t kprime_max = 4;
  std::uint32_t lane_multiple = kDefaultLaneMultiple;
};

int cmd_grid(const GridOpts& opt) {
  GridSpec spec = default_grid_spec();
  spec.recall_target = opt.recall_target;
  spec.kprime_max = opt.kprime_max;
  spec.lane_multiple = opt.lane_multiple;

  const std::vector<GridCell> cells = reduction_factor_grid(spec);

  std::ostringstream table;
  std::vector<ResultRow> rows;
  std::size_t feasible = 0;
  for (const auto& cell : cells) {
    const std::string config = "n=" + std::to_string(cell.n_requested) +
                               ";fraction=" + num(cell.k_fraction, "%.10g");
    table << "n=" << cell.n_requested << " fraction="
          << num(cell.k_fraction, "%.10g") << " k=" << cell.k;
    if (!cell.reduction_factor) {
      table << " infeasible\n";
      rows.push_back({config, "feasible", 0.0, std::nullopt});
      continue;
    }
    ++feasible;
    table << " baseline_elements=" << *cell.baseline_elements
          << " generalized_elements=" << *cell.generalized_elements
          << " (kprime=" << *cell.generalized_local_k
          << " b=" << *cell.generalized_buckets
          << ") reduction=" << num(*cell.reduction_factor, "%.6g") << '\n';
    rows.push_back({config, "k", static_cast<double>(cell.k), std::nullopt});
    rows.push_back({config, "baseline_elements",
                    static_cast<double>(*cell.baseline_elements),
                    std::nullopt});
    rows.push_back({config, "generalized_elements",
                    static_cast<double>(*cell.generalized_elements),
                    std::nullopt});
    rows.push_back({config, "generalized_local_k",
                    static_cast<double>(*cell.generalized_local_k),
                    std::nullopt});
    rows.push_back({config, "reduction_factor", *cell.reduction_factor,
                    std::nullopt});
  }

  emit(opt.common, rows, table.str());
  if (feasible == 0) {
    std::cerr << "error: no feasible grid cell\n";
    return 2;
  }
  return 0;
}

// ---- mips --------------------------------------------------------------------

struct MipsOpts {
  CommonOpts common;
  std::string database;
  std::string queries;
  std::uint64_t k = 0;
  std::uint64_t b = 0;       // 0: choose with the planner
  std::uint32_t kprime = 0;  // 0: choose with the planner
  double recall_target = 0.95;
  std::uint32_t kprime_max = 4;
  std::uint32_t lane_multiple = kDefaultLaneMultiple;
  std::uint64_t block_cols = 0;  // 0: default_block_cols
  bool unfused = false;
  bool verify = false;
  std::uint64_t seed = 0;
};

int cmd_mips(const MipsOpts& opt) {
  const VectorDataset db = read_dataset_file(opt.database);
  const VectorDataset queries = read_dataset_file(opt.queries);
  if (opt.k > UINT32_MAX)
    throw std::invalid_argument("mips: k exceeds 2^32 - 1");
  if ((opt.b == 0) != (opt.kprime == 0))
    throw std::invalid_argument(
        "mips: give both --b and --kprime, or neither (planner)");

  AlgoParams params;
  params.n = db.rows;
  params.global_k = static_cast<std::uint32_t>(opt.k);
  params.lane_multiple = 1;
  if (opt.b != 0) {
    params.num_buckets = opt.b;
    params.local_k = opt.kprime;
  } else {
    // plan on rows padded up to the lane so any file size is plannable;
    // the chosen bucket count divides every multiple of itself, so the
    // padded pipeline accepts it unchanged
    PlanRequest req;
    const std::uint64_t lane = opt.lane_multiple;
    req.n = (db.rows + lane - 1) / lane * lane;
    req.k = opt.k;
    req.recall_target = opt.recall_target;
    req.lane_multiple = lane;
    req.seed = opt.seed;
    req.allowed_local_k.clear();
    for (std::uint32_t kp = 1; kp <= opt.kprime_max; ++kp)
      req.allowed_local_k.push_back(kp);
    const PlanResult plan = select_parameters(req);
    params.num_buckets = plan.num_buckets;
    params.local_k = plan.local_k;
  }
  validate_mips_request(db, queries, params);

  const unsigned threads = resolve_thread_count(opt.common.threads);
  const std::uint64_t block_cols =
      opt.block_cols != 0 ? opt.block_cols : default_block_cols(params);
  const MipsResult result =
      opt.unfused ? mips_unfused(db, queries, params, threads)
                  : mips_fused(db, queries, params, block_cols, threads);

  std::ostringstream table;
  table << "database: rows=" << db.rows << " dims=" << db.dims
        << "  queries: rows=" << queries.rows << '\n';
  table << "params: local_k=" << params.local_k
        << " num_buckets=" << params.num_buckets << " global_k=" << opt.k
        << '\n';
  if (opt.unfused)
    table << "mode: unfused\n";
  else
    table << "mode: fused block_cols=" << block_cols << '\n';
  table << "padded_n=" << result.stats.padded_n
        << " blocks=" << result.stats.blocks
        << " score_buffer_bytes=" << result.stats.score_buffer_bytes << '\n';

  const std::string config =
      "n=" + std::to_string(db.rows) + ";d=" + std::to_string(db.dims) +
      ";q=" + std::to_string(queries.rows) + ";k=" + std::to_string(opt.k) +
      ";kprime=" + std::to_string(params.local_k) +
      ";b=" + std::to_string(params.num_buckets) +
      ";mode=" + (opt.unfused ? "unfused" : "fused");
  std::vector<ResultRow> rows;
  rows.push_back({config, "padded_n",
                  static_cast<double>(result.stats.padded_n), std::nullopt});
  rows.push_back({config, "blocks", static_cast<double>(result.stats.blocks),
                  std::nullopt});
  rows.push_back({config, "score_buffer_bytes",
                  static_cast<double>(result.stats.score_buffer_bytes),
                  std::nullopt});

  if (opt.verify) {
    // brute-force oracle in 8-query slices via the shared scoring kernel
    double sum = 0.0;
    double min_recall = 1.0;
    VectorDataset slice;
    slice.dims = queries.dims;
    std::vector<float> scores;
    for (std::uint64_t q0 = 0; q0 < queries.rows; q0 += 8) {
      const std::uint64_t live = std::min<std::uint64_t>(8, queries.rows - q0);
      slice.rows = live;
      slice.data.assign(queries.data.begin() + q0 * queries.dims,
                        queries.data.begin() + (q0 + live) * queries.dims);
      scores.resize(live * db.rows);
      score_block(slice, db, 0, db.rows, scores.data(), db.rows);
      for (std::uint64_t l = 0; l < live; ++l) {
        const TopKResult exact = exact_top_k(
            {scores.data() + l * db.rows, static_cast<std::size_t>(db.rows)},
            static_cast<std::uint32_t>(opt.k));
        const double r = measure_recall(result.per_query[q0 + l], exact);
        sum += r;
        min_recall = std::min(min_recall, r);
      }
    }
    const double mean = sum / static_cast<double>(queries.rows);
    table << "brute-force recall: mean=" << num(mean)
          << " min=" << num(min_recall) << '\n';
    rows.push_back({config, "mean_recall", mean, std::nullopt});
    rows.push_back({config, "min_recall", min_recall, std::nullopt});
  }

  emit(opt.common, rows, table.str());
  return 0;
}

// ---- model -------------------------------------------------------------------

struct ModelOpts {
  CommonOpts common;
  std::string device;
  std::string profiles_path;
  std::uint64_t dims = 128;
  std::uint32_t kprime = 1;
  bool ridge_only = false;
  bool list = false;
};

int cmd_model(const ModelOpts& opt) {
  std::vector<DeviceProfile> extra;
  if (!opt.profiles_path.empty()) {
    std::ifstream in(opt.profiles_path, std::ios::binary);
    if (!in) throw std::runtime_error("model: cannot open " + opt.profiles_path);
    std::ostringstream text;
    text << in.rdbuf();
    extra = parse_device_profiles(text.str());
  }

  if (opt.list) {
    for (const auto& profile : extra) std::cout << profile.name << '\n';
    for (const auto& profile : builtin_device_profiles()) {
      const auto dup = std::find_if(
          extra.begin(), extra.end(),
          [&](const DeviceProfile& p) { return p.name == profile.name; });
      if (dup == extra.end()) std::cout << profile.name << '\n';
    }
    return 0;
  }
  if (opt.device.empty())
    throw std::invalid_argument("model: --device is required (or --list)");

  std::optional<DeviceProfile> device;
  for (const auto& profile : extra)
    if (profile.name == opt.device) device = profile;
  if (!device) device = find_device_profile(opt.device);
  if (!device)
    throw std::invalid_argument("model: unknown device profile '" +
                                opt.device + "' (try --list)");

  const double per_dot = ridge_vector_ops_per_dot(*device, opt.dims);
  const double per_4bytes = ridge_vector_ops_per_4bytes(*device);
  const BoundednessReport report = stage1_boundedness(opt.kprime, *device);

  std::ostringstream table;
  if (!opt.ridge_only) {
    table << "device: " << device->name << '\n';
    table << "hbm_bytes_per_s: " << num(device->hbm_bytes_per_s, "%.10g")
          << '\n';
    table << "vector_flops_per_s: " << num(device->vector_flops_per_s, "%.10g")
          << '\n';
    table << "matrix_flops_per_s: " << num(device->matrix_flops_per_s, "%.10g")
          << '\n';
  }
  table << "ridge_vector_ops_per_dot: " << num(per_dot, "%.6g")
        << " (dims=" << opt.dims << ")\n";
  table << "ridge_vector_ops_per_4bytes: " << num(per_4bytes, "%.6g") << '\n';
  if (!opt.ridge_only) {
    table << "stage1: local_k=" << opt.kprime
          << " ops_per_element=" << num(report.ops_per_element, "%g")
          << " memory_bound=" << (report.memory_bound ? "yes" : "no")
          << " crossover_local_k=" << report.crossover_local_k << '\n';
  }

  std::vector<ResultRow> rows;
  const std::string config = device->name;
  rows.push_back({config, "hbm_bytes_per_s", device->hbm_bytes_per_s,
                  std::nullopt});
  rows.push_back({config, "vector_flops_per_s", device->vector_flops_per_s,
                  std::nullopt});
  rows.push_back({config, "matrix_flops_per_s", device->matrix_flops_per_s,
                  std::nullopt});
  rows.push_back({config, "ridge_vector_ops_per_dot", per_dot, std::nullopt});
  rows.push_back({config, "ridge_vector_ops_per_4bytes", per_4bytes,
                  std::nullopt});
  rows.push_back({config, "crossover_local_k",
                  static_cast<double>(report.crossover_local_k),
                  std::nullopt});

  emit(opt.common, rows, table.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) try {
  CLI::App app{"approximate top-k: planning, analysis, simulation, MIPS"};
  app.require_subcommand(1);
  int rc = 0;

  PlanOpts plan;
  auto* plan_cmd = app.add_subcommand(
      "plan", "choose (local_k, num_buckets) for a recall target");
  plan_cmd->add_option("--n", plan.n, "row length")->required();
  plan_cmd->add_option("--k", plan.k, "global top-k")->required();
  plan_cmd->add_option("--recall-target", plan.recall_target, "target recall")
      ->capture_default_str();
  plan_cmd->add_option("--max-kprime", plan.max_kprime, "largest local_k tried")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
  plan_cmd
      ->add_option("--lane-multiple", plan.lane_multiple,
                   "bucket counts must be multiples of this lane width")
      ->check(CLI::Range(1u, 1u << 30))
      ->capture_default_str();
  plan_cmd->add_option("--seed", plan.seed, "Monte Carlo substream root")
      ->capture_default_str();
  add_common(plan_cmd, plan.common);
  plan_cmd->callback([&] { rc = cmd_plan(plan); });

  EstimateOpts est;
  auto* est_cmd = app.add_subcommand("estimate-recall",
                                     "expected recall of one configuration");
  est_cmd->add_option("--n", est.n, "row length")->required();
  est_cmd->add_option("--b", est.b, "bucket count")->required();
  est_cmd->add_option("--k", est.k, "global top-k")->required();
  est_cmd->add_option("--kprime", est.kprime, "per-bucket top-k'")
      ->capture_default_str();
  est_cmd
      ->add_option("--method", est.method,
                   "exact | mc | bound (improved, k'=1) | quartic (k'=1)")
      ->check(CLI::IsMember({"exact", "mc", "bound", "quartic"}))
      ->capture_default_str();
  est_cmd
      ->add_option("--trials", est.trials,
                   "mc trial count; 0 = adaptive (3*stderr <= 0.005)")
      ->capture_default_str();
  est_cmd->add_option("--seed", est.seed, "mc seed")->capture_default_str();
  add_common(est_cmd, est.common);
  est_cmd->callback([&] { rc = cmd_estimate_recall(est); });

  SimulateOpts sim;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "run the real pipeline on synthetic rows, report recall");
  sim_cmd->add_option("--n", sim.n, "row length (<= 2^24)")->required();
  sim_cmd->add_option("--b", sim.b, "bucket count")->required();
  sim_cmd->add_option("--k", sim.k, "global top-k")->required();
  sim_cmd->add_option("--kprime", sim.kprime, "per-bucket top-k'")
      ->capture_default_str();
  sim_cmd->add_option("--runs", sim.runs, "number of simulated rows")
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "row-generation seed")
      ->capture_default_str();
  add_common(sim_cmd, sim.common);
  sim_cmd->callback([&] { rc = cmd_simulate(sim); });

  BenchOpts bench;
  auto* bench_cmd = app.add_subcommand(
      "bench", "time stage 1 / stage 2 / total (median and IQR)");
  bench_cmd->add_option("--batch", bench.batch, "rows timed per repeat")
      ->capture_default_str();
  bench_cmd->add_option("--n", bench.n, "row length")->required();
  bench_cmd->add_option("--k", bench.k, "global top-k")->required();
  bench_cmd->add_option("--kprime", bench.kprime, "per-bucket top-k'")
      ->capture_default_str();
  bench_cmd->add_option("--b", bench.b, "bucket count")->required();
  bench_cmd->add_option("--repeats", bench.repeats, "timed repeats")
      ->capture_default_str();
  bench_cmd->add_option("--warmup", bench.warmup, "untimed warmup repeats")
      ->capture_default_str();
  bench_cmd->add_flag("--exact-baseline", bench.exact_baseline,
                      "also time exact_top_k over the same rows");
  bench_cmd->add_option("--seed", bench.seed, "data seed")
      ->capture_default_str();
  add_common(bench_cmd, bench.common);
  bench_cmd->callback([&] { rc = cmd_bench(bench); });

  GridOpts grid;
  auto* grid_cmd = app.add_subcommand(
      "grid", "reduction-factor grid over (n, k/n) cells");
  grid_cmd->add_option("--recall-target", grid.recall_target, "target recall")
      ->capture_default_str();
  grid_cmd->add_option("--kprime-max", grid.kprime_max,
                       "largest local_k for the generalized column")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
  grid_cmd
      ->add_option("--lane-multiple", grid.lane_multiple,
                   "lane width constraint on bucket counts")
      ->check(CLI::Range(1u, 1u << 30))
      ->capture_default_str();
  add_common(grid_cmd, grid.common);
  grid_cmd->callback([&] { rc = cmd_grid(grid); });

  MipsOpts mips;
  auto* mips_cmd = app.add_subcommand(
      "mips", "approximate maximum-inner-product search over dataset files");
  mips_cmd->add_option("--database", mips.database, "ATKV database file")
      ->required()
      ->check(CLI::ExistingFile);
  mips_cmd->add_option("--queries", mips.queries, "ATKV query file")
      ->required()
      ->check(CLI::ExistingFile);
  mips_cmd->add_option("--k", mips.k, "results per query")->required();
  mips_cmd->add_option("--b", mips.b, "bucket count (0 = plan)")
      ->capture_default_str();
  mips_cmd->add_option("--kprime", mips.kprime, "per-bucket top-k' (0 = plan)")
      ->capture_default_str();
  mips_cmd
      ->add_option("--recall-target", mips.recall_target,
                   "planner target when --b/--kprime are 0")
      ->capture_default_str();
  mips_cmd->add_option("--kprime-max", mips.kprime_max, "planner local_k cap")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
  mips_cmd
      ->add_option("--lane-multiple", mips.lane_multiple,
                   "planner lane width")
      ->check(CLI::Range(1u, 1u << 30))
      ->capture_default_str();
  mips_cmd->add_option("--block-cols", mips.block_cols,
                       "fused block width (0 = default)")
      ->capture_default_str();
  mips_cmd->add_flag("--unfused", mips.unfused,
                     "materialize the whole score matrix");
  mips_cmd->add_flag("--verify", mips.verify,
                     "score every query exactly and report recall");
  mips_cmd->add_option("--seed", mips.seed, "planner seed")
      ->capture_default_str();
  add_common(mips_cmd, mips.common);
  mips_cmd->callback([&] { rc = cmd_mips(mips); });

  ModelOpts model;
  auto* model_cmd = app.add_subcommand(
      "model", "device roofline profiles, ridge points, stage-1 boundedness");
  model_cmd->add_option("--device", model.device, "profile name");
  model_cmd->add_option("--profiles", model.profiles_path,
                        "extra profile registry file (key=value format)");
  model_cmd->add_option("--dims", model.dims, "dot-product length")
      ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 32))
      ->capture_default_str();
  model_cmd->add_option("--kprime", model.kprime, "stage-1 local_k")
      ->check(CLI::Range(1u, 1u << 20))
      ->capture_default_str();
  model_cmd->add_flag("--ridge", model.ridge_only,
                      "print only the two ridge points");
  model_cmd->add_flag("--list", model.list, "list known profile names");
  add_common(model_cmd, model.common);
  model_cmd->callback([&] { rc = cmd_model(model); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return rc;
} catch (const atk::NoFeasibleConfigError& e) {
  std::cerr << "error: " << e.what() << '\n';
  return 2;
} catch (const std::exception& e) {
  std::cerr << "error: " << e.what() << '\n';
  return 1;
}
