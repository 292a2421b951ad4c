#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace atk {

// Thrown on malformed container input (bad magic/version, truncation,
// NaN payload, size overflow).
struct DatasetFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Row-major [rows, dims] fp32 matrix with a tiny binary container:
//
//   bytes 0..3   magic "ATKV"
//   byte  4      format version, currently 1
//   bytes 5..12  rows, u64 little-endian
//   bytes 13..20 dims, u64 little-endian
//   then rows*dims fp32 values, little-endian
//
// A 0-row file is exactly the 21-byte header. Payloads must not contain
// NaN (validated on read and write); the same bytes are produced on every
// platform.
struct VectorDataset {
  std::uint64_t rows = 0;
  std::uint64_t dims = 0;
  std::vector<float> data;  // rows * dims

  std::span<const float> row(std::uint64_t r) const {
    return {data.data() + r * dims, static_cast<std::size_t>(dims)};
  }
  float* row_ptr(std::uint64_t r) { return data.data() + r * dims; }
  const float* row_ptr(std::uint64_t r) const { return data.data() + r * dims; }

  void validate() const;  // shape/size consistency and no NaN
};

inline constexpr char kDatasetMagic[4] = {'A', 'T', 'K', 'V'};
inline constexpr std::uint8_t kDatasetVersion = 1;
inline constexpr std::size_t kDatasetHeaderBytes = 21;

void write_dataset(const VectorDataset& dataset, std::ostream& out);
void write_dataset_file(const VectorDataset& dataset,
                        const std::filesystem::path& path);
VectorDataset read_dataset(std::istream& in);
VectorDataset read_dataset_file(const std::filesystem::path& path);

// One row holding the integers 1..n, permuted (Fisher-Yates on a
// seed/row-derived substream) and stored as floats. n <= 2^24 so every
// value is exactly representable in fp32.
std::vector<float> synth_distinct_row(std::uint64_t n, std::uint64_t seed,
                                      std::uint64_t row_index);

// rows x n dataset of such permutations. Row r of synth_distinct(rows, n, s)
// equals synth_distinct_row(n, s, r) for every r, so streaming consumers can
// regenerate rows one at a time.
VectorDataset synth_distinct(std::uint64_t rows, std::uint64_t n,
                             std::uint64_t seed);

}  // namespace atk
