// Microbenchmarks for the two-stage top-k kernels, the MIPS pipelines, and
// the recall estimators. Single-threaded by design: the kernels are
// benchmarked as they run inside one worker.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "atk/dataset.hpp"
#include "atk/mips.hpp"
#include "atk/params.hpp"
#include "atk/planner.hpp"
#include "atk/recall.hpp"
#include "atk/rng.hpp"
#include "atk/topk.hpp"

namespace {

constexpr std::uint64_t kRowLength = 262144;
constexpr std::uint32_t kGlobalK = 1024;

atk::AlgoParams make_params(std::uint64_t n, std::uint64_t buckets,
                            std::uint32_t local_k, std::uint32_t global_k) {
  atk::AlgoParams params;
  params.n = n;
  params.num_buckets = buckets;
  params.local_k = local_k;
  params.global_k = global_k;
  params.lane_multiple = 1;
  return params;
}

const std::vector<float>& shared_row() {
  static const std::vector<float> row =
      atk::synth_distinct_row(kRowLength, /*seed=*/42, /*row_index=*/0);
  return row;
}

atk::VectorDataset random_dataset(std::uint64_t rows, std::uint32_t dims,
                                  std::uint64_t seed) {
  atk::VectorDataset data;
  data.rows = rows;
  data.dims = dims;
  data.data.resize(rows * dims);
  atk::Xoshiro256pp rng(seed);
  for (float& v : data.data)
    v = static_cast<float>(rng.next_double() * 2.0 - 1.0);
  return data;
}

// Stage 1 alone: the 5*local_k - 2 op/element streaming reduction.
void BM_Stage1(benchmark::State& state) {
  const auto local_k = static_cast<std::uint32_t>(state.range(0));
  const atk::AlgoParams params =
      make_params(kRowLength, 4096, local_k, kGlobalK);
  const std::vector<float>& row = shared_row();
  for (auto _ : state) {
    atk::TopKResult grid = atk::stage1_partial_reduce(row, params);
    benchmark::DoNotOptimize(grid.values.data());
    benchmark::DoNotOptimize(grid.indices.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(row.size() * 4));
}
BENCHMARK(BM_Stage1)->Arg(1)->Arg(2)->Arg(3)->Arg(4)->Arg(8)->Unit(
    benchmark::kMillisecond);

// Stage 2 alone: exact selection from a precomputed candidate grid of
// range(0) entries (local_k = 1, so candidates = num_buckets).
void BM_Stage2(benchmark::State& state) {
  const auto buckets = static_cast<std::uint64_t>(state.range(0));
  const atk::AlgoParams params = make_params(kRowLength, buckets, 1, kGlobalK);
  const atk::TopKResult grid = atk::stage1_partial_reduce(shared_row(), params);
  for (auto _ : state) {
    atk::TopKResult top =
        atk::select_top_k_candidates(grid.values, grid.indices, kGlobalK);
    benchmark::DoNotOptimize(top.values.data());
  }
}
BENCHMARK(BM_Stage2)
    ->Arg(2048)
    ->Arg(8192)
    ->Arg(16384)
    ->Arg(65536)
    ->Unit(benchmark::kMicrosecond);

// Full-sort baseline on the raw row.
void BM_ExactTopK(benchmark::State& state) {
  const std::vector<float>& row = shared_row();
  for (auto _ : state) {
    atk::TopKResult top = atk::exact_top_k(row, kGlobalK);
    benchmark::DoNotOptimize(top.values.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(row.size() * 4));
}
BENCHMARK(BM_ExactTopK)->Unit(benchmark::kMillisecond);

// Both stages with the planner's pick for a 0.95 target.
void BM_ApproxTopK(benchmark::State& state) {
  atk::PlanRequest req;
  req.n = kRowLength;
  req.k = kGlobalK;
  req.recall_target = 0.95;
  req.lane_multiple = 128;
  static const atk::AlgoParams params =
      atk::select_parameters(req).params(req);
  const std::vector<float>& row = shared_row();
  for (auto _ : state) {
    atk::TopKResult top = atk::approx_top_k(row, params);
    benchmark::DoNotOptimize(top.values.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(row.size() * 4));
}
BENCHMARK(BM_ApproxTopK)->Unit(benchmark::kMillisecond);

// MIPS, scores materialized in full before reduction.
void BM_MipsUnfused(benchmark::State& state) {
  static const atk::VectorDataset db = random_dataset(8192, 64, 7);
  static const atk::VectorDataset queries = random_dataset(8, 64, 8);
  const atk::AlgoParams params = make_params(8192, 1024, 2, 512);
  for (auto _ : state) {
    atk::MipsResult result = atk::mips_unfused(db, queries, params);
    benchmark::DoNotOptimize(result.per_query.data());
  }
}
BENCHMARK(BM_MipsUnfused)->Unit(benchmark::kMillisecond);

// MIPS, scores streamed through stage 1 in blocks of range(0) columns.
void BM_MipsFused(benchmark::State& state) {
  static const atk::VectorDataset db = random_dataset(8192, 64, 7);
  static const atk::VectorDataset queries = random_dataset(8, 64, 8);
  const atk::AlgoParams params = make_params(8192, 1024, 2, 512);
  const auto block_cols = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    atk::MipsResult result = atk::mips_fused(db, queries, params, block_cols);
    benchmark::DoNotOptimize(result.per_query.data());
  }
}
BENCHMARK(BM_MipsFused)
    ->Arg(256)
    ->Arg(1024)
    ->Arg(4096)
    ->Unit(benchmark::kMillisecond);

// Monte Carlo recall estimation cost per trial count.
void BM_McSampling(benchmark::State& state) {
  const atk::AlgoParams params = make_params(kRowLength, 512, 4, kGlobalK);
  const auto trials = static_cast<std::uint64_t>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    atk::RecallEstimate estimate =
        atk::mc_expected_recall(params, trials, seed++);
    benchmark::DoNotOptimize(estimate.value);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(trials));
}
BENCHMARK(BM_McSampling)
    ->Arg(16384)
    ->Arg(65536)
    ->Arg(262144)
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
