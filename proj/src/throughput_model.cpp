#include "streampart/throughput_model.hpp"

#include <limits>

#include "streampart/error.hpp"
#include "streampart/validate.hpp"

namespace streampart {

std::string_view to_string(CapKind kind) {
  switch (kind) {
    case CapKind::sw_core: return "sw_core";
    case CapKind::cpu_aggregate: return "cpu_aggregate";
    case CapKind::hw_replicas: return "hw_replicas";
    case CapKind::channel: return "channel";
    case CapKind::pcie_aggregate: return "pcie_aggregate";
  }
  return "unknown";
}

namespace {

template <class Num>
Num convert(const Rational& value);

template <>
double convert<double>(const Rational& value) {
  return to_double(value);
}

template <class Num>
std::optional<Num> convert(const std::optional<Rational>& value) {
  if (!value) return std::nullopt;
  return convert<Num>(*value);
}

CapParams<Rational> exact_params(const ProblemSpec& problem, const RepetitionVector& q,
                                 const std::vector<int>& producer) {
  CapParams<Rational> out;
  const std::size_t n = problem.processes.size();
  out.sw_cap.resize(n);
  out.sw_load.resize(n);
  out.hw_cap.resize(n);
  out.hw_cap_max.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& proc = problem.processes[p];
    const Rational qp(q[p]);
    if (proc.sw_throughput.is_finite()) {
      out.sw_cap[p] = proc.sw_throughput.value() / qp;
      out.sw_load[p] = qp / proc.sw_throughput.value();
    }
    if (proc.allows_hw()) {
      const auto& hw = *proc.hw_profile;
      for (int r = 1; r <= hw.r_max; ++r) {
        out.hw_cap[p].push_back(hw.throughput_at(r) / qp);
        if (!out.hw_cap_max[p] || out.hw_cap[p].back() > *out.hw_cap_max[p]) {
          out.hw_cap_max[p] = out.hw_cap[p].back();
        }
      }
    }
  }
  for (std::size_t c = 0; c < problem.channels.size(); ++c) {
    const auto& ch = problem.channels[c];
    Rational demand = Rational(q[producer[c]]) * ch.prod_rate * ch.token_bytes;
    out.channel_demand.push_back(demand);
    if (ch.bandwidth_cap.is_finite()) {
      out.channel_unit_cap.push_back(ch.bandwidth_cap.value() / demand);
    } else {
      out.channel_unit_cap.push_back(std::nullopt);
    }
  }
  out.cpu_cores = problem.platform.cpu_cores;
  if (problem.platform.pcie_bandwidth.is_finite()) {
    out.pcie_bandwidth = problem.platform.pcie_bandwidth.value();
  }
  return out;
}

CapParams<double> to_fast(const CapParams<Rational>& exact) {
  CapParams<double> out;
  for (const auto& v : exact.sw_cap) out.sw_cap.push_back(convert<double>(v));
  for (const auto& v : exact.sw_load) out.sw_load.push_back(convert<double>(v));
  for (const auto& row : exact.hw_cap) {
    std::vector<double> converted;
    for (const auto& v : row) converted.push_back(convert<double>(v));
    out.hw_cap.push_back(std::move(converted));
  }
  for (const auto& v : exact.hw_cap_max) out.hw_cap_max.push_back(convert<double>(v));
  for (const auto& v : exact.channel_unit_cap) out.channel_unit_cap.push_back(convert<double>(v));
  for (const auto& v : exact.channel_demand) out.channel_demand.push_back(convert<double>(v));
  out.cpu_cores = convert<double>(exact.cpu_cores);
  out.pcie_bandwidth = convert<double>(exact.pcie_bandwidth);
  return out;
}

std::int64_t amount(const ResourceVector& resources, const std::string& kind) {
  auto it = resources.find(kind);
  return it == resources.end() ? 0 : it->second;
}

}  // namespace

ThroughputModel::ThroughputModel(ProblemSpec problem) : problem_(std::move(problem)) {
  require_valid(problem_);
  repetition_ = repetition_vector(problem_);

  const std::size_t n = problem_.processes.size();
  for (const auto& ch : problem_.channels) {
    producer_.push_back(static_cast<int>(*problem_.process_index(ch.producer)));
    consumer_.push_back(static_cast<int>(*problem_.process_index(ch.consumer)));
  }
  sink_ = static_cast<int>(*problem_.process_index(problem_.sink));

  const auto& kinds = problem_.platform.resource_kinds;
  for (const auto& kind : kinds) capacity_.push_back(amount(problem_.platform.fpga_capacity, kind));
  r_max_.assign(n, 0);
  res_fixed_.assign(n, std::vector<std::int64_t>(kinds.size(), 0));
  res_per_replica_.assign(n, std::vector<std::int64_t>(kinds.size(), 0));
  for (std::size_t p = 0; p < n; ++p) {
    const auto& proc = problem_.processes[p];
    if (!proc.allows_hw()) continue;
    r_max_[p] = proc.hw_profile->r_max;
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      res_fixed_[p][k] = amount(proc.hw_profile->resource_fixed, kinds[k]);
      res_per_replica_[p][k] = amount(proc.hw_profile->resource_per_replica, kinds[k]);
    }
  }

  exact_ = exact_params(problem_, repetition_, producer_);
  fast_ = to_fast(exact_);
}

Replicas ThroughputModel::resolve_partial(const Assignment& assignment) const {
  Replicas out(problem_.processes.size(), kUndecided);
  for (const auto& [id, decision] : assignment) {
    auto index = problem_.process_index(id);
    if (!index) {
      throw AssignmentError(AssignmentError::Kind::unknown_process,
                            "assignment names unknown process \"" + id + "\"");
    }
    const auto& proc = problem_.processes[*index];
    if (decision.replicas < 0) {
      throw AssignmentError(AssignmentError::Kind::rmax_exceeded,
                            "negative replication factor for \"" + id + "\"");
    }
    if (decision.is_hardware() && !proc.allows_hw()) {
      throw AssignmentError(AssignmentError::Kind::pin_violation,
                            "process \"" + id + "\" cannot be placed in hardware (" +
                                std::string(to_string(proc.placement)) + ")");
    }
    if (!decision.is_hardware() && !proc.allows_sw()) {
      throw AssignmentError(AssignmentError::Kind::pin_violation,
                            "process \"" + id + "\" is pinned to hardware");
    }
    if (decision.is_hardware() && decision.replicas > proc.hw_profile->r_max) {
      throw AssignmentError(AssignmentError::Kind::rmax_exceeded,
                            "process \"" + id + "\": replication factor " +
                                std::to_string(decision.replicas) + " exceeds r_max " +
                                std::to_string(proc.hw_profile->r_max));
    }
    out[*index] = decision.replicas;
  }
  return out;
}

Replicas ThroughputModel::resolve(const Assignment& assignment) const {
  Replicas out = resolve_partial(assignment);
  std::string missing;
  for (std::size_t p = 0; p < out.size(); ++p) {
    if (out[p] == kUndecided) missing += (missing.empty() ? "" : ", ") + problem_.processes[p].id;
  }
  if (!missing.empty()) {
    throw AssignmentError(AssignmentError::Kind::incomplete,
                          "incomplete assignment: no decision for " + missing);
  }
  return out;
}

Assignment ThroughputModel::to_assignment(std::span<const int> replicas) const {
  Assignment out;
  for (std::size_t p = 0; p < replicas.size(); ++p) {
    if (replicas[p] == kUndecided) continue;
    out[problem_.processes[p].id] = Decision{replicas[p]};
  }
  return out;
}

std::vector<std::int64_t> ThroughputModel::committed_resources(
    std::span<const int> replicas) const {
  std::vector<__int128> sums(capacity_.size(), 0);
  for (std::size_t p = 0; p < replicas.size(); ++p) {
    int r = replicas[p];
    if (r == kUndecided && !allows_sw(static_cast<int>(p))) r = 1;
    if (r <= 0) continue;
    for (std::size_t k = 0; k < sums.size(); ++k) {
      sums[k] += __int128(res_fixed_[p][k]) + __int128(res_per_replica_[p][k]) * r;
    }
  }
  std::vector<std::int64_t> out;
  constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
  for (auto s : sums) out.push_back(s > kMax ? kMax : static_cast<std::int64_t>(s));
  return out;
}

bool ThroughputModel::fits(std::span<const int> replicas) const {
  const auto used = committed_resources(replicas);
  for (std::size_t k = 0; k < used.size(); ++k) {
    if (used[k] > capacity_[k]) return false;
  }
  return true;
}

}  // namespace streampart
