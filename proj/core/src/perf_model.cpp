#include "atk/perf_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace atk {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::vector<DeviceProfile>& builtin_profiles_storage() {
  // Peak HBM bandwidth, fp32 vector throughput, low-precision matrix
  // throughput. a100_pcie: 1935 GB/s, 19.5 TF/s, 312 TF/s. h100_sxm:
  // 3350 GB/s, 67 TF/s, 1979 TF/s. tpuv4: 1200 GB/s, 4.3 TF/s, 275 TF/s.
  // tpuv5e: 819 GB/s, 6.14 TF/s, 197 TF/s.
  static const std::vector<DeviceProfile> profiles = {
      {"a100_pcie", 1.935e12, 19.5e12, 312e12},
      {"h100_sxm", 3.35e12, 67e12, 1979e12},
      {"tpuv4", 1.2e12, 4.3e12, 275e12},
      {"tpuv5e", 819e9, 6.14e12, 197e12},
  };
  return profiles;
}

}  // namespace

void DeviceProfile::validate() const {
  if (name.empty()) fail("device profile needs a name");
  const double peaks[] = {hbm_bytes_per_s, vector_flops_per_s,
                          matrix_flops_per_s};
  for (const double p : peaks)
    if (!(p > 0.0) || !std::isfinite(p))
      fail("device profile peaks must be positive and finite: " + name);
}

std::string to_string(Subsystem s) {
  switch (s) {
    case Subsystem::memory: return "memory";
    case Subsystem::vector: return "vector";
    case Subsystem::matrix: return "matrix";
  }
  return "unknown";
}

RuntimeEstimate estimate_runtime(const KernelFootprint& footprint,
                                 const DeviceProfile& device) {
  device.validate();
  const double t_mem =
      static_cast<double>(footprint.mem_bytes) / device.hbm_bytes_per_s;
  const double t_vec =
      static_cast<double>(footprint.vpu_ops) / device.vector_flops_per_s;
  const double t_mat =
      static_cast<double>(footprint.mxu_ops) / device.matrix_flops_per_s;

  RuntimeEstimate est;
  est.seconds = std::max({t_mem, t_vec, t_mat});
  if (t_mem == est.seconds) est.bottlenecks.push_back(Subsystem::memory);
  if (t_vec == est.seconds) est.bottlenecks.push_back(Subsystem::vector);
  if (t_mat == est.seconds) est.bottlenecks.push_back(Subsystem::matrix);
  return est;
}

double ridge_vector_ops_per_dot(const DeviceProfile& device,
                                std::uint64_t dims) {
  device.validate();
  if (dims == 0) fail("dims must be >= 1");
  // A dims-length dot product is 2*dims matrix FLOPs; the MXU finishes
  // pi / (2*dims) dots per second, so the VPU keeps up while it spends at
  // most gamma / (pi / (2*dims)) ops per dot.
  return device.vector_flops_per_s /
         (device.matrix_flops_per_s / (2.0 * static_cast<double>(dims)));
}

double ridge_vector_ops_per_4bytes(const DeviceProfile& device) {
  device.validate();
  return 4.0 * device.vector_flops_per_s / device.hbm_bytes_per_s;
}

BoundednessReport stage1_boundedness(std::uint32_t local_k,
                                     const DeviceProfile& device) {
  if (local_k == 0) fail("local_k must be >= 1");
  BoundednessReport report;
  report.ridge = ridge_vector_ops_per_4bytes(device);
  report.ops_per_element = 5.0 * static_cast<double>(local_k) - 2.0;
  report.memory_bound = report.ops_per_element <= report.ridge;
  const double crossover = std::floor((report.ridge + 2.0) / 5.0);
  report.crossover_local_k =
      crossover < 1.0 ? 0 : static_cast<std::uint32_t>(crossover);
  return report;
}

ArithmeticIntensity mips_arithmetic_intensity(std::uint64_t b,
                                              std::uint64_t d,
                                              std::uint64_t n,
                                              std::uint64_t element_bytes,
                                              bool fused) {
  if (b == 0 || d == 0 || n == 0) fail("b, d, n must be >= 1");
  if (element_bytes == 0) fail("element_bytes must be >= 1");
  const double bd = static_cast<double>(b);
  const double dd = static_cast<double>(d);
  const double nd = static_cast<double>(n);
  const double e = static_cast<double>(element_bytes);

  double traffic = bd * dd + dd * nd;     // operands
  if (!fused) traffic += bd * nd;         // materialized score matrix
  ArithmeticIntensity ai;
  ai.flops_per_byte = 2.0 * bd * dd * nd / (e * traffic);
  // 2*flops/traffic is capped by dropping all but one traffic term; fusing
  // removes the b*n term and with it the d cap.
  std::uint64_t cap = std::min(b, n);
  if (!fused) cap = std::min(cap, d);
  ai.upper_bound = (2.0 / e) * static_cast<double>(cap);
  return ai;
}

KernelFootprint stage1_footprint(std::uint64_t batch, std::uint64_t n,
                                 std::uint32_t local_k) {
  if (batch == 0 || n == 0 || local_k == 0)
    fail("batch, n, local_k must be >= 1");
  KernelFootprint f;
  f.mem_bytes = batch * n * 4;  // each element read once
  f.vpu_ops = batch * n * (5ull * local_k - 2);
  f.mxu_ops = 0;
  return f;
}

KernelFootprint mips_footprint(std::uint64_t b, std::uint64_t d,
                               std::uint64_t n, std::uint64_t element_bytes,
                               std::uint32_t local_k, bool fused) {
  if (b == 0 || d == 0 || n == 0 || local_k == 0 || element_bytes == 0)
    fail("b, d, n, local_k, element_bytes must be >= 1");
  KernelFootprint f;
  std::uint64_t traffic = b * d + d * n;
  if (!fused) traffic += 2ull * b * n;  // scores written, then read back
  f.mem_bytes = traffic * element_bytes;
  f.mxu_ops = 2ull * b * d * n;
  f.vpu_ops = b * n * (5ull * local_k - 2);  // reduction over the scores
  return f;
}

// ---- profile registry -----------------------------------------------------

std::span<const DeviceProfile> builtin_device_profiles() {
  return builtin_profiles_storage();
}

std::optional<DeviceProfile> find_device_profile(std::string_view name) {
  for (const auto& p : builtin_profiles_storage())
    if (p.name == name) return p;
  return std::nullopt;
}

std::string serialize_device_profiles(
    std::span<const DeviceProfile> profiles) {
  std::string out;
  for (const auto& p : profiles) {
    p.validate();
    out += "[" + p.name + "]\n";
    out += "hbm_bytes_per_s = " + format_g17(p.hbm_bytes_per_s) + "\n";
    out += "vector_flops_per_s = " + format_g17(p.vector_flops_per_s) + "\n";
    out += "matrix_flops_per_s = " + format_g17(p.matrix_flops_per_s) + "\n";
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<DeviceProfile> parse_device_profiles(std::string_view text) {
  // malformed external text is a runtime_error, unlike the invalid_argument
  // contract violations elsewhere in this file
  const auto reject = [](const std::string& why) {
    throw std::runtime_error(why);
  };
  std::vector<DeviceProfile> profiles;
  DeviceProfile* current = nullptr;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::string where = "profile registry line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') reject(where + ": unterminated section");
      const auto name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) reject(where + ": empty profile name");
      profiles.push_back({});
      current = &profiles.back();
      current->name = std::string(name);
      continue;
    }
    if (current == nullptr) reject(where + ": key before any [profile]");
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) reject(where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value_text = trim(line.substr(eq + 1));
    double value = 0.0;
    try {
      value = std::stod(std::string(value_text));
    } catch (const std::exception&) {
      reject(where + ": bad number '" + std::string(value_text) + "'");
    }
    if (key == "hbm_bytes_per_s") {
      current->hbm_bytes_per_s = value;
    } else if (key == "vector_flops_per_s") {
      current->vector_flops_per_s = value;
    } else if (key == "matrix_flops_per_s") {
      current->matrix_flops_per_s = value;
    } else {
      reject(where + ": unknown key '" + std::string(key) + "'");
    }
  }
  for (const auto& p : profiles) {
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      reject(std::string("profile registry: ") + e.what());
    }
  }
  return profiles;
}

}  // namespace atk
