#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "streampart/rational.hpp"

namespace streampart {

/// FPGA resource amounts keyed by resource-kind name ("lut", "bram", ...).
using ResourceVector = std::map<std::string, std::int64_t>;

/// Hardware implementation parameters of a process.
struct HwProfile {
  Rational base_throughput;  // firings/s of one replica
  ResourceVector resource_fixed;
  ResourceVector resource_per_replica;
  int r_max = 1;
  /// Optional total throughput for R = 1..r_max; overrides the linear model.
  std::vector<Rational> throughput_table;

  /// Total firings/s with `replicas` copies (linear unless a table is given).
  Rational throughput_at(int replicas) const;

  /// Resources consumed with `replicas` copies, for one kind.
  std::int64_t resource_at(const std::string& kind, int replicas) const;

  bool operator==(const HwProfile& other) const = default;
};

enum class Placement { pinned_sw, pinned_hw, free };

std::string_view to_string(Placement placement);
std::optional<Placement> placement_from_string(std::string_view text);

struct ProcessSpec {
  std::string id;
  Placement placement = Placement::pinned_sw;
  Limit sw_throughput;  // firings/s on one dedicated core
  std::optional<HwProfile> hw_profile;

  bool allows_sw() const { return placement != Placement::pinned_hw; }
  bool allows_hw() const {
    return placement != Placement::pinned_sw && hw_profile.has_value();
  }

  bool operator==(const ProcessSpec& other) const = default;
};

struct ChannelSpec {
  std::string id;
  std::string producer;
  std::string consumer;
  std::int64_t prod_rate = 1;    // tokens per producer firing
  std::int64_t cons_rate = 1;    // tokens per consumer firing
  std::int64_t token_bytes = 1;
  Limit bandwidth_cap;           // bytes/s
  bool scale_with_replication = true;

  bool operator==(const ChannelSpec& other) const = default;
};

struct PlatformSpec {
  Rational cpu_cores;
  std::vector<std::string> resource_kinds;
  ResourceVector fpga_capacity;
  Limit pcie_bandwidth;  // bytes/s shared by all SW<->HW channels

  bool operator==(const PlatformSpec& other) const = default;
};

struct ProblemSpec {
  PlatformSpec platform;
  std::vector<ProcessSpec> processes;
  std::vector<ChannelSpec> channels;
  std::string sink;
  /// Free-form notes keyed by subject, e.g. calibration row counts.
  std::map<std::string, std::string> provenance;

  const ProcessSpec* find_process(std::string_view id) const;
  const ChannelSpec* find_channel(std::string_view id) const;
  std::optional<std::size_t> process_index(std::string_view id) const;

  bool operator==(const ProblemSpec& other) const = default;
};

/// Placement decision for one process: software, or hardware with R replicas.
/// Ordered SW < HW(1) < HW(2) < ...
struct Decision {
  int replicas = 0;  // 0 = software

  static Decision software() { return Decision{0}; }
  static Decision hardware(int replicas) { return Decision{replicas}; }

  bool is_hardware() const { return replicas > 0; }

  auto operator<=>(const Decision& other) const = default;
};

std::string to_string(Decision decision);

/// Process id -> decision. Partial assignments simply omit processes.
using Assignment = std::map<std::string, Decision>;

}  // namespace streampart
