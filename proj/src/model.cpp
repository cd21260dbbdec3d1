#include "streampart/model.hpp"

#include <algorithm>

namespace streampart {

Rational HwProfile::throughput_at(int replicas) const {
  if (!throughput_table.empty()) return throughput_table.at(replicas - 1);
  return base_throughput * replicas;
}

std::int64_t HwProfile::resource_at(const std::string& kind,
                                    int replicas) const {
  std::int64_t total = 0;
  if (auto it = resource_fixed.find(kind); it != resource_fixed.end()) {
    total += it->second;
  }
  if (auto it = resource_per_replica.find(kind);
      it != resource_per_replica.end()) {
    total += it->second * replicas;
  }
  return total;
}

std::string_view to_string(Placement placement) {
  switch (placement) {
    case Placement::pinned_sw: return "pinned_sw";
    case Placement::pinned_hw: return "pinned_hw";
    case Placement::free: return "free";
  }
  return "free";
}

std::optional<Placement> placement_from_string(std::string_view text) {
  if (text == "pinned_sw") return Placement::pinned_sw;
  if (text == "pinned_hw") return Placement::pinned_hw;
  if (text == "free") return Placement::free;
  return std::nullopt;
}

std::string to_string(Decision decision) {
  if (!decision.is_hardware()) return "SW";
  return "HW(" + std::to_string(decision.replicas) + ")";
}

const ProcessSpec* ProblemSpec::find_process(std::string_view id) const {
  auto it = std::find_if(processes.begin(), processes.end(),
                         [&](const ProcessSpec& p) { return p.id == id; });
  return it == processes.end() ? nullptr : &*it;
}

const ChannelSpec* ProblemSpec::find_channel(std::string_view id) const {
  auto it = std::find_if(channels.begin(), channels.end(),
                         [&](const ChannelSpec& c) { return c.id == id; });
  return it == channels.end() ? nullptr : &*it;
}

std::optional<std::size_t> ProblemSpec::process_index(std::string_view id) const {
  for (std::size_t i = 0; i < processes.size(); ++i) {
    if (processes[i].id == id) return i;
  }
  return std::nullopt;
}

}  // namespace streampart
