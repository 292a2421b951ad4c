#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "atk/perf_model.hpp"

using namespace atk;

namespace {

DeviceProfile device(const char* name) {
  const auto found = find_device_profile(name);
  REQUIRE(found.has_value());
  return *found;
}

}  // namespace

TEST_CASE("builtin profiles carry the published peaks") {
  const auto all = builtin_device_profiles();
  REQUIRE(all.size() == 4);

  const auto a100 = device("a100_pcie");
  CHECK(a100.hbm_bytes_per_s == 1.935e12);
  CHECK(a100.vector_flops_per_s == 19.5e12);
  CHECK(a100.matrix_flops_per_s == 312e12);

  const auto h100 = device("h100_sxm");
  CHECK(h100.hbm_bytes_per_s == 3.35e12);
  CHECK(h100.vector_flops_per_s == 67e12);
  CHECK(h100.matrix_flops_per_s == 1979e12);

  const auto v4 = device("tpuv4");
  CHECK(v4.hbm_bytes_per_s == 1.2e12);
  CHECK(v4.vector_flops_per_s == 4.3e12);
  CHECK(v4.matrix_flops_per_s == 275e12);

  const auto v5e = device("tpuv5e");
  CHECK(v5e.hbm_bytes_per_s == 819e9);
  CHECK(v5e.vector_flops_per_s == 6.14e12);
  CHECK(v5e.matrix_flops_per_s == 197e12);

  CHECK(!find_device_profile("dgx").has_value());
}

TEST_CASE("ridge points reproduce the published table") {
  struct Row {
    const char* name;
    double per_dot;    // printed "vector ops per 128-d dot"
    double per_bytes;  // printed "vector ops per 4 bytes"
  };
  const Row rows[] = {
      {"a100_pcie", 16.0, 40.0},
      {"h100_sxm", 8.0, 80.0},
      {"tpuv4", 4.0, 14.0},
      {"tpuv5e", 8.0, 30.0},
  };
  for (const auto& row : rows) {
    const auto dev = device(row.name);
    CHECK(std::abs(ridge_vector_ops_per_dot(dev, 128) - row.per_dot) <= 1.0);
    CHECK(std::abs(ridge_vector_ops_per_4bytes(dev) - row.per_bytes) <= 1.0);
  }

  // exact expected quotients for two of them
  CHECK(ridge_vector_ops_per_dot(device("a100_pcie"), 128) ==
        Catch::Approx(4992.0 / 312.0).epsilon(1e-14));
  CHECK(ridge_vector_ops_per_4bytes(device("tpuv5e")) ==
        Catch::Approx(24.56e12 / 819e9).epsilon(1e-14));

  // ridge per dot scales linearly in dims
  const auto v4 = device("tpuv4");
  CHECK(ridge_vector_ops_per_dot(v4, 256) ==
        Catch::Approx(2.0 * ridge_vector_ops_per_dot(v4, 128)).epsilon(1e-14));
  CHECK_THROWS_AS(ridge_vector_ops_per_dot(v4, 0), std::invalid_argument);
}

TEST_CASE("runtime estimate takes the slowest subsystem") {
  DeviceProfile dev;
  dev.name = "toy";
  dev.hbm_bytes_per_s = 100.0;
  dev.vector_flops_per_s = 10.0;
  dev.matrix_flops_per_s = 1000.0;

  SECTION("single bottleneck") {
    const auto est = estimate_runtime({1000, 20, 500}, dev);
    CHECK(est.seconds == 10.0);  // memory: 1000/100
    REQUIRE(est.bottlenecks.size() == 1);
    CHECK(est.bottlenecks[0] == Subsystem::memory);
    CHECK(to_string(est.bottlenecks[0]) == "memory");
  }

  SECTION("exact tie reports both subsystems") {
    const auto est = estimate_runtime({1000, 100, 0}, dev);
    CHECK(est.seconds == 10.0);
    REQUIRE(est.bottlenecks.size() == 2);
    CHECK(est.bottlenecks[0] == Subsystem::memory);
    CHECK(est.bottlenecks[1] == Subsystem::vector);
  }

  SECTION("zero footprint runs in zero time, all subsystems tied") {
    const auto est = estimate_runtime({0, 0, 0}, dev);
    CHECK(est.seconds == 0.0);
    CHECK(est.bottlenecks.size() == 3);
  }

  SECTION("runtime is homogeneous in the footprint") {
    const KernelFootprint f{123, 456, 789};
    const auto one = estimate_runtime(f, dev);
    const auto ten = estimate_runtime({1230, 4560, 7890}, dev);
    CHECK(ten.seconds == Catch::Approx(10.0 * one.seconds).epsilon(1e-14));
  }

  SECTION("invalid profile is rejected") {
    dev.vector_flops_per_s = 0.0;
    CHECK_THROWS_AS(estimate_runtime({1, 1, 1}, dev), std::invalid_argument);
  }
}

TEST_CASE("stage 1 stays memory-bound until local_k 6 on tpuv5e") {
  const auto v5e = device("tpuv5e");
  for (std::uint32_t kp = 1; kp <= 6; ++kp) {
    const auto report = stage1_boundedness(kp, v5e);
    CHECK(report.memory_bound);
    CHECK(report.ops_per_element == 5.0 * kp - 2.0);
  }
  const auto beyond = stage1_boundedness(7, v5e);
  CHECK(!beyond.memory_bound);

  CHECK(stage1_boundedness(1, v5e).crossover_local_k == 6);
  CHECK(stage1_boundedness(1, v5e).ridge ==
        Catch::Approx(29.98778998778999).epsilon(1e-12));

  // faster memory moves the crossover down
  CHECK(stage1_boundedness(1, device("tpuv4")).crossover_local_k == 3);
  CHECK(stage1_boundedness(1, device("h100_sxm")).crossover_local_k == 16);
}

TEST_CASE("footprints count bytes and operations structurally") {
  const auto s1 = stage1_footprint(8, 262144, 4);
  CHECK(s1.mem_bytes == 8ull * 262144 * 4);
  CHECK(s1.vpu_ops == 8ull * 262144 * 18);
  CHECK(s1.mxu_ops == 0);

  const std::uint64_t b = 1024, d = 128, n = 1000000;
  const auto unfused = mips_footprint(b, d, n, 4, 1, false);
  CHECK(unfused.mxu_ops == 2ull * b * d * n);
  CHECK(unfused.mem_bytes == (b * d + d * n + 2 * b * n) * 4);
  CHECK(unfused.vpu_ops == b * n * 3);

  const auto fused = mips_footprint(b, d, n, 4, 1, true);
  CHECK(fused.mem_bytes == (b * d + d * n) * 4);  // scores never round-trip
  CHECK(fused.mxu_ops == unfused.mxu_ops);
  CHECK_THROWS_AS(stage1_footprint(0, 1, 1), std::invalid_argument);
}

TEST_CASE("matmul arithmetic intensity and its cap") {
  // reference shape: 1024 queries x 128 dims x 1e6 database columns, fp32
  const auto unfused = mips_arithmetic_intensity(1024, 128, 1000000, 4, false);
  CHECK(unfused.flops_per_byte ==
        Catch::Approx(56.88241693389552).epsilon(1e-12));
  CHECK(unfused.upper_bound == 64.0);  // (2/4) * min(b, d, n) = 128/2
  CHECK(unfused.flops_per_byte < unfused.upper_bound);

  const auto fused = mips_arithmetic_intensity(1024, 128, 1000000, 4, true);
  CHECK(fused.upper_bound == 512.0);  // d cap gone: (2/4) * 1024
  CHECK(fused.flops_per_byte > unfused.flops_per_byte);
  CHECK(fused.flops_per_byte < fused.upper_bound);

  // fp16 operands double both intensity and cap
  const auto half = mips_arithmetic_intensity(1024, 128, 1000000, 2, false);
  CHECK(half.flops_per_byte ==
        Catch::Approx(2.0 * unfused.flops_per_byte).epsilon(1e-14));
  CHECK(half.upper_bound == 128.0);
}

TEST_CASE("device registry round-trips through text") {
  const auto all = builtin_device_profiles();
  const auto text = serialize_device_profiles(all);
  const auto back = parse_device_profiles(text);
  REQUIRE(back.size() == all.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].name == all[i].name);
    CHECK(back[i].hbm_bytes_per_s == all[i].hbm_bytes_per_s);
    CHECK(back[i].vector_flops_per_s == all[i].vector_flops_per_s);
    CHECK(back[i].matrix_flops_per_s == all[i].matrix_flops_per_s);
  }

  const auto parsed = parse_device_profiles(
      "# lab box\n[dev1]\nhbm_bytes_per_s = 1e11\n"
      "vector_flops_per_s = 2e12   # fp32\nmatrix_flops_per_s = 3e13\n");
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].name == "dev1");
  CHECK(parsed[0].hbm_bytes_per_s == 1e11);
  CHECK(parsed[0].vector_flops_per_s == 2e12);
  CHECK(parsed[0].matrix_flops_per_s == 3e13);

  CHECK_THROWS_AS(parse_device_profiles("hbm_bytes_per_s = 1e11\n"),
                  std::runtime_error);  // key before any [section]
  CHECK_THROWS_AS(parse_device_profiles("[x]\nhbm_bytes_per_s = -2\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(parse_device_profiles("[x]\nunknown_key = 2\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(parse_device_profiles("[x]\nhbm_bytes_per_s = 1e9\n"),
                  std::runtime_error);  // missing the other two peaks
}
