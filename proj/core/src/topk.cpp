#include "atk/topk.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <string>

#include "atk/threads.hpp"

namespace atk {

namespace {

constexpr std::uint64_t kMaxIndexableN = 0xffffffffull;  // 2^32 - 1

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

void reject_nan(std::span<const float> block) {
  // x != x only for NaN; the reduction runs on a total order, so NaN input
  // is rejected up front rather than silently misordered.
  bool has_nan = false;
  for (float x : block) has_nan |= (x != x);
  if (has_nan) fail("input contains NaN");
}

// Sortable 64-bit key: high 32 bits order by value descending (IEEE total
// order with -0.0 canonicalized to +0.0 so the tie matches float ==), low 32
// bits by index ascending. Sorting keys ascending yields the output order.
inline std::uint64_t rank_key(float value, std::uint32_t index) {
  auto bits = std::bit_cast<std::uint32_t>(value);
  if (bits == 0x80000000u) bits = 0;  // -0.0 ties with +0.0
  const std::uint32_t asc =
      (bits & 0x80000000u) ? ~bits : (bits | 0x80000000u);
  return (static_cast<std::uint64_t>(~asc) << 32) | index;
}

inline float key_value(std::uint64_t key) {
  const auto asc = static_cast<std::uint32_t>(~(key >> 32));
  const std::uint32_t bits =
      (asc & 0x80000000u) ? (asc & 0x7fffffffu) : ~asc;
  return std::bit_cast<float>(bits);
}

inline std::uint32_t key_index(std::uint64_t key) {
  return static_cast<std::uint32_t>(key);
}

}  // namespace

void AlgoParams::validate() const {
  if (n == 0) fail("n must be >= 1");
  if (n > kMaxIndexableN) fail("n exceeds the 32-bit index range");
  if (num_buckets == 0) fail("num_buckets must be >= 1");
  if (n % num_buckets != 0) fail("num_buckets must divide n");
  if (lane_multiple == 0) fail("lane_multiple must be >= 1");
  if (num_buckets % lane_multiple != 0)
    fail("num_buckets must be a multiple of lane_multiple");
  if (local_k == 0) fail("local_k must be >= 1");
  if (global_k == 0) fail("global_k must be >= 1");
  if (global_k > n) fail("global_k must not exceed n");
  if (num_candidates() < global_k)
    fail("num_buckets * local_k must be >= global_k");
}

void AlgoParams::validate_analysis() const {
  if (n == 0) fail("n must be >= 1");
  if (num_buckets == 0) fail("num_buckets must be >= 1");
  if (num_buckets > n) fail("num_buckets must not exceed n");
  if (local_k == 0) fail("local_k must be >= 1");
  if (global_k == 0) fail("global_k must be >= 1");
  if (global_k > n) fail("global_k must not exceed n");
}

// ---- single-bucket update (scalar reference form) -------------------------

void update_bucket(BucketState& state, float value, std::uint32_t index) {
  auto& v = state.values;
  auto& ix = state.indices;
  const std::size_t kp = v.size();

  // conditional insert at the minimum slot: 1 compare + 2 selects
  const bool take = value >= v[kp - 1];
  v[kp - 1] = take ? value : v[kp - 1];
  ix[kp - 1] = take ? index : ix[kp - 1];

  // bubble pass, incoming value as LHS: 1 compare + 4 selects per position.
  // If the insert did not happen the first compare already fails (value is
  // below the minimum), so every step is a no-op select.
  for (std::size_t k = kp - 1; k >= 1; --k) {
    const bool up = value > v[k - 1];
    const float va = v[k], vb = v[k - 1];
    v[k] = up ? vb : va;
    v[k - 1] = up ? va : vb;
    const std::uint32_t ia = ix[k], ib = ix[k - 1];
    ix[k] = up ? ib : ia;
    ix[k - 1] = up ? ia : ib;
  }
}

void update_bucket(BucketState& state, float value, std::uint32_t index,
                   OpCounts& ops) {
  update_bucket(state, value, index);
  const std::uint64_t kp = state.values.size();
  ops.compares += kp;            // 1 insert test + (kp-1) bubble tests
  ops.selects += 4 * kp - 2;     // 2 insert selects + 4 per bubble position
}

// ---- streaming stage 1 -----------------------------------------------------

Stage1Accumulator::Stage1Accumulator(const AlgoParams& params)
    : params_(params) {
  params_.validate();
  const std::size_t slots =
      static_cast<std::size_t>(params_.num_candidates());
  values_.assign(slots, kNegInf);
  indices_.assign(slots, 0);
}

void Stage1Accumulator::consume(std::span<const float> block) {
  if (consumed_ + block.size() > params_.n)
    fail("stage 1 fed more than n elements");
  reject_nan(block);

  const std::uint64_t b_count = params_.num_buckets;
  const std::uint32_t kp = params_.local_k;
  const float* in = block.data();
  std::uint64_t g = consumed_;
  std::uint64_t remaining = block.size();

  // Process bucket-aligned runs: input positions g..g+len-1 map onto the
  // contiguous state slice [off, off+len), so every inner loop below is a
  // unit-stride compare/select sweep.
  while (remaining != 0) {
    const std::uint64_t off = g % b_count;
    const std::uint64_t len = std::min(remaining, b_count - off);

    float* vmin = values_.data() + static_cast<std::size_t>(kp - 1) * b_count + off;
    std::uint32_t* imin =
        indices_.data() + static_cast<std::size_t>(kp - 1) * b_count + off;
    const auto base = static_cast<std::uint32_t>(g);
    for (std::uint64_t j = 0; j < len; ++j) {
      const bool take = in[j] >= vmin[j];
      vmin[j] = take ? in[j] : vmin[j];
      imin[j] = take ? base + static_cast<std::uint32_t>(j) : imin[j];
    }
    for (std::uint32_t k = kp - 1; k >= 1; --k) {
      float* va = values_.data() + static_cast<std::size_t>(k) * b_count + off;
      float* vb = va - b_count;
      std::uint32_t* ia =
          indices_.data() + static_cast<std::size_t>(k) * b_count + off;
      std::uint32_t* ib = ia - b_count;
      for (std::uint64_t j = 0; j < len; ++j) {
        const bool up = in[j] > vb[j];
        const float x = va[j], y = vb[j];
        va[j] = up ? y : x;
        vb[j] = up ? x : y;
        const std::uint32_t p = ia[j], q = ib[j];
        ia[j] = up ? q : p;
        ib[j] = up ? p : q;
      }
    }

    in += len;
    g += len;
    remaining -= len;
  }
  consumed_ = g;
}

TopKResult Stage1Accumulator::candidates() const {
  return TopKResult{values_, indices_};
}

TopKResult stage1_partial_reduce(std::span<const float> input,
                                 const AlgoParams& params) {
  params.validate();
  if (input.size() != params.n)
    fail("input length does not match params.n");
  Stage1Accumulator acc(params);
  acc.consume(input);
  return acc.candidates();
}

// ---- exact selection -------------------------------------------------------

namespace {

TopKResult top_k_from_keys(std::vector<std::uint64_t>& keys, std::uint32_t k) {
  std::sort(keys.begin(), keys.end());
  TopKResult out;
  out.values.resize(k);
  out.indices.resize(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    out.values[i] = key_value(keys[i]);
    out.indices[i] = key_index(keys[i]);
  }
  return out;
}

}  // namespace

TopKResult exact_top_k(std::span<const float> input, std::uint32_t k) {
  if (k == 0) fail("k must be >= 1");
  if (input.size() > kMaxIndexableN + 1)
    fail("input exceeds the 32-bit index range");
  if (k > input.size()) fail("k must not exceed the input length");
  reject_nan(input);

  std::vector<std::uint64_t> keys(input.size());
  for (std::size_t i = 0; i < input.size(); ++i)
    keys[i] = rank_key(input[i], static_cast<std::uint32_t>(i));
  return top_k_from_keys(keys, k);
}

TopKResult select_top_k_candidates(std::span<const float> values,
                                   std::span<const std::uint32_t> indices,
                                   std::uint32_t k,
                                   std::uint64_t index_limit) {
  if (values.size() != indices.size())
    fail("candidate value/index lengths differ");
  if (k == 0) fail("k must be >= 1");
  reject_nan(values);

  std::vector<std::uint64_t> keys;
  keys.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (indices[i] < index_limit)
      keys.push_back(rank_key(values[i], indices[i]));
  }
  if (keys.size() < k) fail("fewer candidates than k");
  return top_k_from_keys(keys, k);
}

TopKResult approx_top_k(std::span<const float> input,
                        const AlgoParams& params) {
  params.validate();
  if (input.size() != params.n)
    fail("input length does not match params.n");

  Stage1Accumulator acc(params);
  acc.consume(input);

  // Grid rows k >= bucket_size are all sentinels (a bucket of s elements
  // fills exactly min(local_k, s) slots); slicing them off keeps stage 2 on
  // real elements only.
  const std::uint64_t filled = std::min<std::uint64_t>(
      params.local_k, params.bucket_size());
  const std::size_t count =
      static_cast<std::size_t>(filled * params.num_buckets);
  return select_top_k_candidates(
      std::span<const float>(acc.values().data(), count),
      std::span<const std::uint32_t>(acc.indices().data(), count),
      params.global_k);
}

std::vector<TopKResult> approx_top_k_batch(std::span<const float> rows,
                                           std::uint64_t row_count,
                                           const AlgoParams& params,
                                           unsigned threads) {
  params.validate();
  if (rows.size() != row_count * params.n)
    fail("batch length does not match row_count * n");

  std::vector<TopKResult> out(row_count);
  parallel_for(0, row_count, threads, [&](std::uint64_t r) {
    out[r] = approx_top_k(rows.subspan(r * params.n, params.n), params);
  });
  return out;
}

double measure_recall(const TopKResult& approx, const TopKResult& exact) {
  if (approx.size() != exact.size())
    fail("recall needs results of equal size");
  if (approx.size() == 0) fail("recall of empty results is undefined");

  std::vector<std::uint32_t> a(approx.indices);
  std::vector<std::uint32_t> b(exact.indices);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t hits = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++hits;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(exact.size());
}

}  // namespace atk
