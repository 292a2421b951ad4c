#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "atk/csv.hpp"
#include "atk/dataset.hpp"
#include "atk/params.hpp"
#include "atk/recall.hpp"
#include "atk/rng.hpp"

using namespace atk;

namespace {

struct CliOutput {
  int exit_code = -1;
  std::string text;  // stdout and stderr interleaved
};

// The binary under test is passed in by the build (ATK_CLI).
std::string cli_path() {
  const char* env = std::getenv("ATK_CLI");
  REQUIRE(env != nullptr);
  return env;
}

CliOutput run_cli(const std::string& args) {
  const std::string command = "\"" + cli_path() + "\" " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliOutput out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) out.text.append(buf, got);
  const int status = pclose(pipe);
  out.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::optional<ResultRow> find_row(const std::vector<ResultRow>& rows,
                                  const std::string& metric,
                                  const std::string& config_part = "") {
  for (const auto& row : rows)
    if (row.metric == metric && contains(row.config, config_part)) return row;
  return std::nullopt;
}

// Temporary ATKV files for the mips subcommand.
struct TempDataset {
  std::filesystem::path path;

  TempDataset(const std::string& name, std::uint64_t rows, std::uint64_t dims,
              std::uint64_t seed) {
    path = std::filesystem::temp_directory_path() / name;
    VectorDataset ds;
    ds.rows = rows;
    ds.dims = dims;
    ds.data.resize(rows * dims);
    Xoshiro256pp rng(seed);
    for (auto& x : ds.data)
      x = static_cast<float>(rng.next_double() * 2.0 - 1.0);
    write_dataset_file(ds, path);
  }
  ~TempDataset() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("plan prints the winner and passing candidates") {
  const auto out =
      run_cli("plan --n 262144 --k 1024 --recall-target 0.95");
  CHECK(out.exit_code == 0);
  CHECK(contains(out.text,
                 "winner: local_k=4 num_buckets=512 num_elements=2048"));
  CHECK(contains(out.text, "passing candidates"));
  CHECK(contains(out.text, "local_k=1 num_buckets=16384"));
  CHECK_FALSE(contains(out.text, "warning"));
}

TEST_CASE("plan warns near-unity recall targets") {
  const auto out =
      run_cli("plan --n 262144 --k 1024 --recall-target 0.999");
  CHECK(out.exit_code == 0);
  CHECK(contains(out.text, "warning"));
}

TEST_CASE("plan exits 2 when no bucket count is legal") {
  const auto out = run_cli("plan --n 100 --k 10 --recall-target 0.9");
  CHECK(out.exit_code == 2);
  CHECK(contains(out.text, "error"));
}

TEST_CASE("estimate-recall exact value matches the library") {
  const auto out = run_cli("estimate-recall --n 8 --b 2 --k 2 --kprime 1");
  CHECK(out.exit_code == 0);
  CHECK(contains(out.text, "recall: 0.785714"));
  CHECK(contains(out.text, "method=exact"));

  // CSV round-trips the exact double
  const auto csv =
      run_cli("estimate-recall --n 8 --b 2 --k 2 --kprime 1 --format csv");
  REQUIRE(csv.exit_code == 0);
  const auto rows = parse_results_csv_string(csv.text);
  const auto row = find_row(rows, "recall");
  REQUIRE(row.has_value());
  AlgoParams params;
  params.n = 8;
  params.num_buckets = 2;
  params.global_k = 2;
  params.local_k = 1;
  params.lane_multiple = 1;
  CHECK(row->value == exact_expected_recall(params).value);
  CHECK_FALSE(row->std_error.has_value());
}

TEST_CASE("estimate-recall rejects bound methods above local_k 1") {
  const auto out =
      run_cli("estimate-recall --n 64 --b 8 --k 4 --kprime 2 --method bound");
  CHECK(out.exit_code == 1);
  CHECK(contains(out.text, "error"));
  const auto quartic = run_cli(
      "estimate-recall --n 64 --b 8 --k 4 --kprime 2 --method quartic");
  CHECK(quartic.exit_code == 1);
}

TEST_CASE("estimate-recall monte carlo is deterministic per seed") {
  const std::string args =
      "estimate-recall --n 1024 --b 64 --k 32 --kprime 1 --method mc "
      "--trials 4096 --seed 7";
  const auto first = run_cli(args);
  const auto second = run_cli(args);
  CHECK(first.exit_code == 0);
  CHECK(first.text == second.text);
  CHECK(contains(first.text, "method=monte_carlo"));
  CHECK(contains(first.text, "std_error="));
  CHECK(contains(first.text, "trials=4096"));

  const auto other = run_cli(
      "estimate-recall --n 1024 --b 64 --k 32 --kprime 1 --method mc "
      "--trials 4096 --seed 8");
  CHECK(other.text != first.text);
}

TEST_CASE("simulate reports exact recall for lossless configurations") {
  const auto out =
      run_cli("simulate --n 256 --b 16 --k 16 --kprime 16 --runs 32 --seed 1");
  CHECK(out.exit_code == 0);
  CHECK(contains(out.text, "empirical_recall: 1.000000"));
  CHECK(contains(out.text, "exact_recall: 1.000000"));
}

TEST_CASE("simulate CSV carries empirical and predicted recall") {
  const auto out = run_cli(
      "simulate --n 4096 --b 256 --k 64 --kprime 1 --runs 64 --seed 5 "
      "--format csv");
  REQUIRE(out.exit_code == 0);
  const auto rows = parse_results_csv_string(out.text);
  const auto empirical = find_row(rows, "empirical_recall");
  const auto exact = find_row(rows, "exact_recall");
  const auto mc = find_row(rows, "mc_recall");
  REQUIRE(empirical.has_value());
  REQUIRE(exact.has_value());
  REQUIRE(mc.has_value());
  REQUIRE(empirical->std_error.has_value());
  // empirical agrees with the analysis within sampling noise
  CHECK(std::abs(empirical->value - exact->value) <=
        std::max(4.0 * *empirical->std_error, 0.01));
  CHECK(mc->std_error.has_value());
}

TEST_CASE("simulate rejects an illegal bucket count") {
  const auto out = run_cli("simulate --n 100 --b 7 --k 5 --kprime 1 --runs 4");
  CHECK(out.exit_code == 1);
  CHECK(contains(out.text, "error"));
}

TEST_CASE("bench reports medians with interquartile ranges") {
  const auto out = run_cli(
      "bench --batch 2 --n 4096 --k 64 --kprime 2 --b 128 --repeats 5 "
      "--warmup 1 --exact-baseline --format csv");
  REQUIRE(out.exit_code == 0);
  const auto rows = parse_results_csv_string(out.text);
  for (const char* metric : {"stage1_ms", "stage2_ms", "total_ms", "exact_ms"}) {
    const auto row = find_row(rows, metric);
    REQUIRE(row.has_value());
    CHECK(row->value > 0.0);
    REQUIRE(row->std_error.has_value());  // the IQR
    CHECK(*row->std_error >= 0.0);
  }

  const auto single = run_cli(
      "bench --batch 1 --n 1024 --k 8 --kprime 1 --b 64 --repeats 1 "
      "--warmup 0");
  CHECK(single.exit_code == 0);
  CHECK(contains(single.text, "total_ms"));
}

TEST_CASE("grid default output contains the eight-fold cell") {
  const auto out = run_cli("grid --format csv");
  REQUIRE(out.exit_code == 0);
  const auto rows = parse_results_csv_string(out.text);
  const auto cell =
      find_row(rows, "reduction_factor", "n=262144;fraction=0.00390625");
  REQUIRE(cell.has_value());
  CHECK(cell->value == 8.0);

  const auto baseline =
      find_row(rows, "baseline_elements", "n=262144;fraction=0.00390625");
  const auto generalized =
      find_row(rows, "generalized_elements", "n=262144;fraction=0.00390625");
  REQUIRE(baseline.has_value());
  REQUIRE(generalized.has_value());
  CHECK(baseline->value == 16384.0);
  CHECK(generalized->value == 2048.0);
}

TEST_CASE("model prints the device ridge points") {
  const auto table = run_cli("model --device tpuv5e --ridge");
  CHECK(table.exit_code == 0);
  CHECK(contains(table.text, "ridge_vector_ops_per_dot"));
  CHECK(contains(table.text, "ridge_vector_ops_per_4bytes"));

  const auto csv = run_cli("model --device tpuv5e --format csv");
  REQUIRE(csv.exit_code == 0);
  const auto rows = parse_results_csv_string(csv.text);
  const auto per_dot = find_row(rows, "ridge_vector_ops_per_dot");
  const auto per_4bytes = find_row(rows, "ridge_vector_ops_per_4bytes");
  const auto crossover = find_row(rows, "crossover_local_k");
  REQUIRE(per_dot.has_value());
  REQUIRE(per_4bytes.has_value());
  REQUIRE(crossover.has_value());
  CHECK(std::abs(per_dot->value - 8.0) < 1.0);
  CHECK(std::abs(per_4bytes->value - 30.0) < 1.0);
  CHECK(crossover->value == 6.0);

  const auto unknown = run_cli("model --device nosuchdevice");
  CHECK(unknown.exit_code == 1);
  const auto list = run_cli("model --list");
  CHECK(list.exit_code == 0);
  CHECK(contains(list.text, "a100_pcie"));
  CHECK(contains(list.text, "h100_sxm"));
  CHECK(contains(list.text, "tpuv4"));
  CHECK(contains(list.text, "tpuv5e"));
}

TEST_CASE("mips searches dataset files and verifies against brute force") {
  TempDataset db("atk_cli_db.atkv", 96, 8, 1001);
  TempDataset queries("atk_cli_q.atkv", 4, 8, 1002);
  const std::string base = "mips --database \"" + db.path.string() +
                           "\" --queries \"" + queries.path.string() + "\"";

  // bucket size 4 == kprime: stage 1 keeps everything, recall is exactly 1
  const auto fused =
      run_cli(base + " --k 10 --b 24 --kprime 4 --verify --format csv");
  REQUIRE(fused.exit_code == 0);
  const auto rows = parse_results_csv_string(fused.text);
  const auto mean = find_row(rows, "mean_recall");
  const auto min = find_row(rows, "min_recall");
  REQUIRE(mean.has_value());
  REQUIRE(min.has_value());
  CHECK(mean->value == 1.0);
  CHECK(min->value == 1.0);
  const auto buffer = find_row(rows, "score_buffer_bytes");
  REQUIRE(buffer.has_value());
  CHECK(buffer->value == 4.0 * 4104 * 4);  // default block width for b=24

  const auto unfused = run_cli(base +
                               " --k 10 --b 24 --kprime 4 --unfused --verify "
                               "--format csv");
  REQUIRE(unfused.exit_code == 0);
  const auto urows = parse_results_csv_string(unfused.text);
  CHECK(find_row(urows, "mean_recall")->value == 1.0);
  CHECK(find_row(urows, "score_buffer_bytes")->value == 4.0 * 96 * 4);
  CHECK(find_row(urows, "blocks")->value == 1.0);

  // planner path: 96 rows pad to 128 at the default lane; B=128 is lossless
  const auto planned = run_cli(base + " --k 10 --verify --format csv");
  REQUIRE(planned.exit_code == 0);
  const auto prows = parse_results_csv_string(planned.text);
  CHECK(find_row(prows, "mean_recall")->value == 1.0);

  // --b and --kprime must come together
  const auto half = run_cli(base + " --k 10 --b 24");
  CHECK(half.exit_code == 1);
}

TEST_CASE("usage errors exit 1 and help exits 0") {
  CHECK(run_cli("estimate-recall --b 2 --k 2").exit_code == 1);  // missing --n
  CHECK(run_cli("nosuchcommand").exit_code == 1);
  CHECK(run_cli("").exit_code == 1);  // a subcommand is required
  CHECK(run_cli("plan --n 8 --k 2 --format xml").exit_code == 1);
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("plan --help").exit_code == 0);
  CHECK(run_cli("mips --database /nonexistent --queries /nonexistent --k 1")
            .exit_code == 1);
}
