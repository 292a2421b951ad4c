#include "atk/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "atk/rng.hpp"

namespace atk {

namespace {

constexpr std::uint64_t kMaxSynthN = 1ull << 24;  // fp32-exact integer range

void put_u64_le(unsigned char* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint64_t get_u64_le(const unsigned char* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  return v;
}

void reject_nan_payload(const std::vector<float>& data) {
  bool has_nan = false;
  for (const float x : data) has_nan |= (x != x);
  if (has_nan) throw DatasetFormatError("dataset payload contains NaN");
}

}  // namespace

void VectorDataset::validate() const {
  if (dims != 0 && rows > UINT64_MAX / dims)
    throw DatasetFormatError("dataset shape overflows");
  if (data.size() != rows * dims)
    throw DatasetFormatError("dataset payload size does not match shape");
  reject_nan_payload(data);
}

void write_dataset(const VectorDataset& dataset, std::ostream& out) {
  dataset.validate();

  unsigned char header[kDatasetHeaderBytes];
  std::memcpy(header, kDatasetMagic, 4);
  header[4] = kDatasetVersion;
  put_u64_le(header + 5, dataset.rows);
  put_u64_le(header + 13, dataset.dims);
  out.write(reinterpret_cast<const char*>(header), sizeof header);

  // explicit little-endian fp32 payload, staged in chunks
  constexpr std::size_t kChunk = 1 << 16;
  std::vector<unsigned char> buf(kChunk * 4);
  std::size_t i = 0;
  while (i < dataset.data.size()) {
    const std::size_t count = std::min(kChunk, dataset.data.size() - i);
    for (std::size_t j = 0; j < count; ++j) {
      const auto bits = std::bit_cast<std::uint32_t>(dataset.data[i + j]);
      buf[4 * j + 0] = static_cast<unsigned char>(bits);
      buf[4 * j + 1] = static_cast<unsigned char>(bits >> 8);
      buf[4 * j + 2] = static_cast<unsigned char>(bits >> 16);
      buf[4 * j + 3] = static_cast<unsigned char>(bits >> 24);
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(count * 4));
    i += count;
  }
  if (!out) throw DatasetFormatError("dataset write failed");
}

void write_dataset_file(const VectorDataset& dataset,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetFormatError("cannot open for write: " + path.string());
  write_dataset(dataset, out);
}

VectorDataset read_dataset(std::istream& in) {
  unsigned char header[kDatasetHeaderBytes];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (in.gcount() != static_cast<std::streamsize>(sizeof header))
    throw DatasetFormatError("dataset truncated: header incomplete");
  if (std::memcmp(header, kDatasetMagic, 4) != 0)
    throw DatasetFormatError("bad dataset magic");
  if (header[4] != kDatasetVersion)
    throw DatasetFormatError("unsupported dataset version " +
                             std::to_string(header[4]));

  VectorDataset dataset;
  dataset.rows = get_u64_le(header + 5);
  dataset.dims = get_u64_le(header + 13);
  if (dataset.dims != 0 && dataset.rows > UINT64_MAX / dataset.dims)
    throw DatasetFormatError("dataset shape overflows");
  const std::uint64_t total = dataset.rows * dataset.dims;
  if (total > (1ull << 34))  // 64 GiB of fp32 — beyond anything sane here
    throw DatasetFormatError("dataset too large");
  dataset.data.resize(static_cast<std::size_t>(total));

  constexpr std::size_t kChunk = 1 << 16;
  std::vector<unsigned char> buf(kChunk * 4);
  std::size_t i = 0;
  while (i < dataset.data.size()) {
    const std::size_t count = std::min(kChunk, dataset.data.size() - i);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(count * 4));
    if (in.gcount() != static_cast<std::streamsize>(count * 4))
      throw DatasetFormatError("dataset truncated: payload incomplete");
    for (std::size_t j = 0; j < count; ++j) {
      const std::uint32_t bits =
          static_cast<std::uint32_t>(buf[4 * j + 0]) |
          (static_cast<std::uint32_t>(buf[4 * j + 1]) << 8) |
          (static_cast<std::uint32_t>(buf[4 * j + 2]) << 16) |
          (static_cast<std::uint32_t>(buf[4 * j + 3]) << 24);
      dataset.data[i + j] = std::bit_cast<float>(bits);
    }
    i += count;
  }
  reject_nan_payload(dataset.data);
  return dataset;
}

VectorDataset read_dataset_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetFormatError("cannot open for read: " + path.string());
  return read_dataset(in);
}

std::vector<float> synth_distinct_row(std::uint64_t n, std::uint64_t seed,
                                      std::uint64_t row_index) {
  if (n == 0) throw std::invalid_argument("synth_distinct: n must be >= 1");
  if (n > kMaxSynthN)
    throw std::invalid_argument(
        "synth_distinct: n must be <= 2^24 so values stay fp32-exact");

  std::vector<float> row(static_cast<std::size_t>(n));
  for (std::uint64_t i = 0; i < n; ++i)
    row[static_cast<std::size_t>(i)] = static_cast<float>(i + 1);

  // Fisher-Yates on a per-row substream
  Xoshiro256pp rng(derive_seed(seed, row_index));
  for (std::uint64_t i = n - 1; i >= 1; --i) {
    const std::uint64_t j = rng.next_below(i + 1);
    std::swap(row[static_cast<std::size_t>(i)], row[static_cast<std::size_t>(j)]);
  }
  return row;
}

VectorDataset synth_distinct(std::uint64_t rows, std::uint64_t n,
                             std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("synth_distinct: n must be >= 1");
  if (n > kMaxSynthN)
    throw std::invalid_argument(
        "synth_distinct: n must be <= 2^24 so values stay fp32-exact");

  VectorDataset dataset;
  dataset.rows = rows;
  dataset.dims = n;
  dataset.data.resize(static_cast<std::size_t>(rows * n));
  for (std::uint64_t r = 0; r < rows; ++r) {
    const auto row = synth_distinct_row(n, seed, r);
    std::memcpy(dataset.row_ptr(r), row.data(), row.size() * sizeof(float));
  }
  return dataset;
}

}  // namespace atk
