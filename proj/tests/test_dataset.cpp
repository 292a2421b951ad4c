#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "atk/csv.hpp"
#include "atk/dataset.hpp"

using namespace atk;

namespace {

std::string to_bytes(const VectorDataset& dataset) {
  std::ostringstream out(std::ios::binary);
  write_dataset(dataset, out);
  return out.str();
}

VectorDataset from_bytes(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_dataset(in);
}

}  // namespace

TEST_CASE("dataset round-trips bit-exactly") {
  VectorDataset dataset;
  dataset.rows = 3;
  dataset.dims = 4;
  dataset.data = {1.5f,
                  -0.0f,
                  0.0f,
                  std::numeric_limits<float>::infinity(),
                  -std::numeric_limits<float>::infinity(),
                  std::numeric_limits<float>::denorm_min(),
                  std::numeric_limits<float>::max(),
                  std::numeric_limits<float>::lowest(),
                  -1.0f / 3.0f,
                  3.1415927f,
                  -2.718281828f,
                  1e-30f};

  const auto bytes = to_bytes(dataset);
  REQUIRE(bytes.size() == kDatasetHeaderBytes + 12 * 4);

  const auto back = from_bytes(bytes);
  REQUIRE(back.rows == 3);
  REQUIRE(back.dims == 4);
  for (std::size_t i = 0; i < dataset.data.size(); ++i)
    REQUIRE(std::bit_cast<std::uint32_t>(back.data[i]) ==
            std::bit_cast<std::uint32_t>(dataset.data[i]));
}

TEST_CASE("dataset header layout is fixed") {
  VectorDataset empty;
  empty.rows = 0;
  empty.dims = 7;

  const auto bytes = to_bytes(empty);
  REQUIRE(bytes.size() == kDatasetHeaderBytes);  // 0 rows -> header only
  CHECK(bytes.substr(0, 4) == "ATKV");
  CHECK(static_cast<std::uint8_t>(bytes[4]) == kDatasetVersion);
  // rows = 0 and dims = 7, both little-endian u64
  for (int i = 5; i < 13; ++i) CHECK(bytes[i] == 0);
  CHECK(static_cast<std::uint8_t>(bytes[13]) == 7);
  for (int i = 14; i < 21; ++i) CHECK(bytes[i] == 0);
}

TEST_CASE("dataset read rejects malformed input") {
  VectorDataset dataset;
  dataset.rows = 2;
  dataset.dims = 2;
  dataset.data = {1, 2, 3, 4};
  const auto good = to_bytes(dataset);

  SECTION("bad magic") {
    auto bytes = good;
    bytes[0] = 'X';
    CHECK_THROWS_AS(from_bytes(bytes), DatasetFormatError);
  }
  SECTION("unknown version") {
    auto bytes = good;
    bytes[4] = 2;
    CHECK_THROWS_AS(from_bytes(bytes), DatasetFormatError);
  }
  SECTION("truncated header") {
    CHECK_THROWS_AS(from_bytes(good.substr(0, 12)), DatasetFormatError);
  }
  SECTION("truncated payload") {
    CHECK_THROWS_AS(from_bytes(good.substr(0, good.size() - 3)),
                    DatasetFormatError);
  }
  SECTION("NaN in the payload") {
    auto bytes = good;
    const auto nan_bits =
        std::bit_cast<std::uint32_t>(std::numeric_limits<float>::quiet_NaN());
    for (int i = 0; i < 4; ++i)
      bytes[kDatasetHeaderBytes + i] =
          static_cast<char>((nan_bits >> (8 * i)) & 0xff);
    CHECK_THROWS_AS(from_bytes(bytes), DatasetFormatError);
  }
}

TEST_CASE("dataset write validates shape and payload") {
  VectorDataset dataset;
  dataset.rows = 2;
  dataset.dims = 2;
  dataset.data = {1, 2, 3};  // one value short
  std::ostringstream out(std::ios::binary);
  CHECK_THROWS_AS(write_dataset(dataset, out), DatasetFormatError);

  dataset.data = {1, 2, 3, std::numeric_limits<float>::quiet_NaN()};
  CHECK_THROWS_AS(write_dataset(dataset, out), DatasetFormatError);
}

TEST_CASE("dataset file round-trip") {
  const auto path = std::filesystem::temp_directory_path() / "atk_ds_test.bin";
  VectorDataset dataset;
  dataset.rows = 5;
  dataset.dims = 3;
  for (int i = 0; i < 15; ++i)
    dataset.data.push_back(static_cast<float>(i) * 0.25f - 1.0f);
  write_dataset_file(dataset, path);
  REQUIRE(std::filesystem::file_size(path) == kDatasetHeaderBytes + 15 * 4);
  const auto back = read_dataset_file(path);
  CHECK(back.rows == dataset.rows);
  CHECK(back.dims == dataset.dims);
  CHECK(back.data == dataset.data);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(read_dataset_file(path), DatasetFormatError);  // gone now
}

TEST_CASE("synth_distinct rows are permutations of 1..n") {
  const std::uint64_t n = 1000;
  const auto dataset = synth_distinct(4, n, 42);
  REQUIRE(dataset.rows == 4);
  REQUIRE(dataset.dims == n);
  for (std::uint64_t r = 0; r < dataset.rows; ++r) {
    std::vector<float> sorted(dataset.row(r).begin(), dataset.row(r).end());
    std::sort(sorted.begin(), sorted.end());
    for (std::uint64_t i = 0; i < n; ++i)
      REQUIRE(sorted[i] == static_cast<float>(i + 1));
  }
  // distinct rows really are different permutations
  CHECK(!std::equal(dataset.row(0).begin(), dataset.row(0).end(),
                    dataset.row(1).begin()));
}

TEST_CASE("synth_distinct is deterministic and streamable") {
  const auto dataset = synth_distinct(3, 257, 7);
  const auto again = synth_distinct(3, 257, 7);
  CHECK(dataset.data == again.data);

  for (std::uint64_t r = 0; r < 3; ++r) {
    const auto streamed = synth_distinct_row(257, 7, r);
    REQUIRE(std::equal(streamed.begin(), streamed.end(),
                       dataset.row(r).begin()));
  }

  const auto other_seed = synth_distinct(1, 257, 8);
  CHECK(!std::equal(other_seed.row(0).begin(), other_seed.row(0).end(),
                    dataset.row(0).begin()));
}

TEST_CASE("synth_distinct stays inside the fp32-exact range") {
  CHECK_NOTHROW(synth_distinct_row(1, 0, 0));
  CHECK_THROWS_AS(synth_distinct_row((1ull << 24) + 1, 0, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(synth_distinct(1, 0, 0), std::invalid_argument);
}

TEST_CASE("results CSV round-trips exact doubles") {
  std::vector<ResultRow> rows;
  rows.push_back({"n=262144;b=512;kp=4;k=1024", "recall_mean",
                  0.9908008047363281, 0.0003117});
  rows.push_back({"n=1048576;b=9856;kp=1;k=1024", "recall_exact",
                  0.9501953125, std::nullopt});
  rows.push_back({"edge", "tiny", 4.9406564584124654e-324, std::nullopt});
  rows.push_back({"edge", "neg", -1.0 / 3.0, 2.5e-17});

  const auto text = results_csv_string(rows);
  CHECK(text.rfind("config,metric,value,stderr\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);

  const auto back = parse_results_csv_string(text);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].config == rows[i].config);
    CHECK(back[i].metric == rows[i].metric);
    CHECK(back[i].value == rows[i].value);  // %.17g makes this exact
    REQUIRE(back[i].std_error.has_value() == rows[i].std_error.has_value());
    if (rows[i].std_error) CHECK(*back[i].std_error == *rows[i].std_error);
  }
}

TEST_CASE("results CSV rejects malformed input") {
  CHECK_THROWS_AS(parse_results_csv_string("nope\n"), std::runtime_error);
  CHECK_THROWS_AS(
      parse_results_csv_string("config,metric,value,stderr\na,b,1\n"),
      std::runtime_error);
  CHECK_THROWS_AS(
      parse_results_csv_string("config,metric,value,stderr\na,b,xyz,\n"),
      std::runtime_error);

  std::vector<ResultRow> bad;
  bad.push_back({"has,comma", "m", 1.0, std::nullopt});
  std::ostringstream out;
  CHECK_THROWS_AS(write_results_csv(out, bad), std::invalid_argument);
}

TEST_CASE("results CSV accepts CRLF line endings") {
  const auto rows = parse_results_csv_string(
      "config,metric,value,stderr\r\nc1,recall,0.5,\r\n");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].value == 0.5);
  CHECK(!rows[0].std_error.has_value());
}
