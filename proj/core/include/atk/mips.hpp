#pragma once

#include <cstdint>
#include <vector>

#include "atk/dataset.hpp"
#include "atk/params.hpp"
#include "atk/topk.hpp"

namespace atk {

// Scores are inner products, one fp32 accumulator per (query, database row)
// pair, summed over the dimension in ascending index order. Both pipelines
// compute every score with the same kernel, so their scores — and therefore
// their results — are bit-identical; the pipelines differ only in how much
// of the score matrix exists at once.
//
// When num_buckets does not divide database.rows the column space is
// logically padded with -inf scores up to the next multiple; padded
// candidates are dropped (index >= rows) before stage 2 ranks them.

struct MipsStats {
  // Bytes of transient score storage: b * n_padded * 4 unfused,
  // b * block_cols * 4 fused.
  std::uint64_t score_buffer_bytes = 0;
  std::uint64_t padded_n = 0;
  std::uint64_t blocks = 0;  // column blocks processed (1 when unfused)
};

struct MipsResult {
  std::vector<TopKResult> per_query;
  MipsStats stats;
};

// params.n must equal database.rows; params must validate once n is padded
// to a bucket multiple, and global_k <= database.rows.
void validate_mips_request(const VectorDataset& database,
                           const VectorDataset& queries,
                           const AlgoParams& params);

// Materializes the full [b, n_padded] score matrix, then reduces each row.
MipsResult mips_unfused(const VectorDataset& database,
                        const VectorDataset& queries, const AlgoParams& params,
                        unsigned threads = 1);

// Streams column blocks of block_cols scores through per-query stage-1
// accumulators; only [b, block_cols] scores exist at a time. block_cols must
// be a multiple of num_buckets or a divisor of it (so every block stays
// aligned to the bucket stride).
MipsResult mips_fused(const VectorDataset& database,
                      const VectorDataset& queries, const AlgoParams& params,
                      std::uint64_t block_cols, unsigned threads = 1);

// Fused block width targeting ~4K columns, snapped to the alignment rule.
std::uint64_t default_block_cols(const AlgoParams& params);

// The shared scoring kernel: out[q * out_stride + (c - c0)] =
// <queries.row(q), database.row(c)> for c in [c0, c1). Exposed for oracle
// use in tests.
void score_block(const VectorDataset& queries, const VectorDataset& database,
                 std::uint64_t c0, std::uint64_t c1, float* out,
                 std::uint64_t out_stride);

}  // namespace atk
