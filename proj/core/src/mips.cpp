#include "atk/mips.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "atk/threads.hpp"

namespace atk {

namespace {

constexpr std::uint64_t kLanes = 8;       // query lanes per scoring pass
constexpr std::uint64_t kColumnTile = 512;  // database rows kept hot per tile

std::uint64_t padded_n(const AlgoParams& params) {
  const std::uint64_t b = params.num_buckets;
  return (params.n + b - 1) / b * b;
}

AlgoParams padded_params(const AlgoParams& params) {
  AlgoParams p = params;
  p.n = padded_n(params);
  return p;
}

// Candidate-grid prefix that holds real (streamed) elements; grid rows past
// the padded bucket size are all sentinels.
std::size_t filled_slots(const AlgoParams& padded) {
  const std::uint64_t filled =
      std::min<std::uint64_t>(padded.local_k, padded.bucket_size());
  return static_cast<std::size_t>(filled * padded.num_buckets);
}

}  // namespace

void validate_mips_request(const VectorDataset& database,
                           const VectorDataset& queries,
                           const AlgoParams& params) {
  database.validate();
  queries.validate();
  if (database.dims != queries.dims)
    throw std::invalid_argument("mips: database/query dims differ");
  if (database.dims == 0)
    throw std::invalid_argument("mips: dims must be >= 1");
  if (database.rows == 0)
    throw std::invalid_argument("mips: database must not be empty");
  if (queries.rows == 0)
    throw std::invalid_argument("mips: queries must not be empty");
  if (params.n != database.rows)
    throw std::invalid_argument("mips: params.n must equal database rows");
  if (params.global_k > database.rows)
    throw std::invalid_argument("mips: global_k exceeds database rows");
  padded_params(params).validate();
}

void score_block(const VectorDataset& queries, const VectorDataset& database,
                 std::uint64_t c0, std::uint64_t c1, float* out,
                 std::uint64_t out_stride) {
  const std::uint64_t b = queries.rows;
  const std::uint64_t d = queries.dims;

  // Queries are processed in fixed 8-lane groups over a transposed tile, so
  // every (query, row) dot runs the identical mul-then-add sequence over
  // ascending dimension index no matter how b, n, or the blocking vary —
  // that is what keeps fused and unfused runs bit-identical.
  const std::uint64_t groups = (b + kLanes - 1) / kLanes;
  std::vector<float> tile(d * kLanes);

  for (std::uint64_t ct = c0; ct < c1; ct += kColumnTile) {
    const std::uint64_t ce = std::min(c1, ct + kColumnTile);
    for (std::uint64_t g = 0; g < groups; ++g) {
      const std::uint64_t q0 = g * kLanes;
      const std::uint64_t lanes_live = std::min(kLanes, b - q0);
      // transpose the (up to) 8 query rows; dead lanes hold zeros
      for (std::uint64_t j = 0; j < d; ++j) {
        for (std::uint64_t l = 0; l < kLanes; ++l) {
          tile[j * kLanes + l] =
              l < lanes_live ? queries.row_ptr(q0 + l)[j] : 0.0f;
        }
      }
      for (std::uint64_t c = ct; c < ce; ++c) {
        const float* w = database.row_ptr(c);
        float acc[kLanes] = {0, 0, 0, 0, 0, 0, 0, 0};
        for (std::uint64_t j = 0; j < d; ++j) {
          const float wj = w[j];
          const float* qj = &tile[j * kLanes];
          for (std::uint64_t l = 0; l < kLanes; ++l) acc[l] += qj[l] * wj;
        }
        for (std::uint64_t l = 0; l < lanes_live; ++l)
          out[(q0 + l) * out_stride + (c - c0)] = acc[l];
      }
    }
  }
}

namespace {

TopKResult reduce_query(const Stage1Accumulator& acc, const AlgoParams& padded,
                        std::uint64_t real_n, std::uint32_t k) {
  const std::size_t count = filled_slots(padded);
  return select_top_k_candidates(
      std::span<const float>(acc.values().data(), count),
      std::span<const std::uint32_t>(acc.indices().data(), count), k, real_n);
}

}  // namespace

MipsResult mips_unfused(const VectorDataset& database,
                        const VectorDataset& queries, const AlgoParams& params,
                        unsigned threads) {
  validate_mips_request(database, queries, params);
  const AlgoParams padded = padded_params(params);
  const std::uint64_t b = queries.rows;
  const std::uint64_t n = database.rows;
  const std::uint64_t np = padded.n;

  // the whole [b, n_padded] score matrix exists at once
  std::vector<float> scores(static_cast<std::size_t>(b * np), kNegInf);
  score_block(queries, database, 0, n, scores.data(), np);

  MipsResult result;
  result.per_query.resize(static_cast<std::size_t>(b));
  result.stats.score_buffer_bytes = b * np * 4;
  result.stats.padded_n = np;
  result.stats.blocks = 1;

  parallel_for(0, b, threads, [&](std::uint64_t q) {
    Stage1Accumulator acc(padded);
    acc.consume(std::span<const float>(scores.data() + q * np,
                                       static_cast<std::size_t>(np)));
    result.per_query[static_cast<std::size_t>(q)] =
        reduce_query(acc, padded, n, params.global_k);
  });
  return result;
}

MipsResult mips_fused(const VectorDataset& database,
                      const VectorDataset& queries, const AlgoParams& params,
                      std::uint64_t block_cols, unsigned threads) {
  validate_mips_request(database, queries, params);
  if (block_cols == 0)
    throw std::invalid_argument("mips: block_cols must be >= 1");
  if (block_cols % params.num_buckets != 0 &&
      params.num_buckets % block_cols != 0)
    throw std::invalid_argument(
        "mips: block_cols must be a multiple or a divisor of num_buckets");

  const AlgoParams padded = padded_params(params);
  const std::uint64_t b = queries.rows;
  const std::uint64_t n = database.rows;
  const std::uint64_t np = padded.n;

  // only [b, block_cols] scores exist at a time
  std::vector<float> scores(static_cast<std::size_t>(b * block_cols));

  std::vector<Stage1Accumulator> accs;
  accs.reserve(static_cast<std::size_t>(b));
  for (std::uint64_t q = 0; q < b; ++q) accs.emplace_back(padded);

  MipsResult result;
  result.stats.score_buffer_bytes = b * block_cols * 4;
  result.stats.padded_n = np;

  for (std::uint64_t c0 = 0; c0 < np; c0 += block_cols) {
    const std::uint64_t cols = std::min(block_cols, np - c0);
    const std::uint64_t real_end = std::min(n, c0 + cols);
    if (c0 < real_end) {
      score_block(queries, database, c0, real_end, scores.data(), block_cols);
    }
    if (real_end < c0 + cols) {
      // padded columns score -inf for every query; a block may lie entirely
      // in the padded tail, in which case every column pads
      const std::uint64_t pad_off = real_end > c0 ? real_end - c0 : 0;
      for (std::uint64_t q = 0; q < b; ++q) {
        float* row = scores.data() + q * block_cols;
        std::fill(row + pad_off, row + cols, kNegInf);
      }
    }
    parallel_for(0, b, threads, [&](std::uint64_t q) {
      accs[static_cast<std::size_t>(q)].consume(std::span<const float>(
          scores.data() + q * block_cols, static_cast<std::size_t>(cols)));
    });
    ++result.stats.blocks;
  }

  result.per_query.resize(static_cast<std::size_t>(b));
  parallel_for(0, b, threads, [&](std::uint64_t q) {
    result.per_query[static_cast<std::size_t>(q)] = reduce_query(
        accs[static_cast<std::size_t>(q)], padded, n, params.global_k);
  });
  return result;
}

std::uint64_t default_block_cols(const AlgoParams& params) {
  const std::uint64_t b = params.num_buckets;
  if (b >= 4096) return b;
  return b * ((4096 + b - 1) / b);
}

}  // namespace atk
