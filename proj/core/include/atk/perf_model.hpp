#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace atk {

// Three-term roofline ("ridge point") model: a kernel is limited by HBM
// bandwidth, vector throughput, or matrix throughput, whichever is slowest.
struct DeviceProfile {
  std::string name;
  double hbm_bytes_per_s = 0.0;     // beta
  double vector_flops_per_s = 0.0;  // gamma (fp32 VPU)
  double matrix_flops_per_s = 0.0;  // pi (low-precision MXU)

  void validate() const;  // positive finite peaks, non-empty name
};

struct KernelFootprint {
  std::uint64_t mem_bytes = 0;
  std::uint64_t vpu_ops = 0;
  std::uint64_t mxu_ops = 0;
};

enum class Subsystem { memory, vector, matrix };

std::string to_string(Subsystem s);

struct RuntimeEstimate {
  double seconds = 0.0;
  // Every subsystem whose term attains the max (ties report all of them;
  // an all-zero footprint ties all three at 0 s).
  std::vector<Subsystem> bottlenecks;
};

// runtime = max(mem_bytes/beta, vpu_ops/gamma, mxu_ops/pi).
RuntimeEstimate estimate_runtime(const KernelFootprint& footprint,
                                 const DeviceProfile& device);

// VPU ops per dot product at which vector work catches up with the MXU for
// dims-length dot products: gamma / (pi / (2*dims)).
double ridge_vector_ops_per_dot(const DeviceProfile& device,
                                std::uint64_t dims);

// VPU ops per 4-byte element loaded at which vector work catches up with
// memory: 4 * gamma / beta.
double ridge_vector_ops_per_4bytes(const DeviceProfile& device);

struct BoundednessReport {
  bool memory_bound = false;        // 5*local_k - 2 <= ridge
  double ops_per_element = 0.0;     // 5*local_k - 2
  double ridge = 0.0;               // ridge_vector_ops_per_4bytes
  std::uint32_t crossover_local_k = 0;  // largest memory-bound local_k
};

// Stage 1 reads each 4-byte element once and spends 5*local_k - 2 vector ops
// on it; it stays memory-bound while that is below the ridge. The crossover
// is floor((ridge + 2) / 5).
BoundednessReport stage1_boundedness(std::uint32_t local_k,
                                     const DeviceProfile& device);

struct ArithmeticIntensity {
  double flops_per_byte = 0.0;
  // (2/element_bytes) * min(b, d, n); fusing drops the d cap along with the
  // b*n traffic term.
  double upper_bound = 0.0;
};

// MIPS scoring intensity for a [b, d] x [d, n] product with element_bytes-
// wide operands: 2*b*d*n / (element_bytes * (b*d + d*n + [b*n])); the b*n
// score-matrix term disappears when the reduction is fused into the matmul.
ArithmeticIntensity mips_arithmetic_intensity(std::uint64_t b, std::uint64_t d,
                                              std::uint64_t n,
                                              std::uint64_t element_bytes,
                                              bool fused);

// Footprint builders for the modeled kernels (batch rows of length n).
KernelFootprint stage1_footprint(std::uint64_t batch, std::uint64_t n,
                                 std::uint32_t local_k);
KernelFootprint mips_footprint(std::uint64_t b, std::uint64_t d,
                               std::uint64_t n, std::uint64_t element_bytes,
                               std::uint32_t local_k, bool fused);

// ---- profile registry -----------------------------------------------------

// Built-in profiles: a100_pcie, h100_sxm, tpuv4, tpuv5e.
std::span<const DeviceProfile> builtin_device_profiles();
std::optional<DeviceProfile> find_device_profile(std::string_view name);

// Text registry, INI-style:
//   [name]
//   hbm_bytes_per_s = 1.935e12
//   vector_flops_per_s = 1.95e13
//   matrix_flops_per_s = 3.12e14
// '#' starts a comment. Values are printed with enough digits to round-trip.
// parse_device_profiles throws std::runtime_error on malformed text.
std::string serialize_device_profiles(std::span<const DeviceProfile> profiles);
std::vector<DeviceProfile> parse_device_profiles(std::string_view text);

}  // namespace atk
