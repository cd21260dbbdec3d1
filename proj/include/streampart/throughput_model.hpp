#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "streampart/model.hpp"
#include "streampart/rates.hpp"

namespace streampart {

/// The five families of caps on the iteration rate lambda.
enum class CapKind {
  sw_core,         // one SW process runs on at most one core
  cpu_aggregate,   // SW processes share cpu_cores
  hw_replicas,     // R replicas of a HW kernel
  channel,         // per-channel bandwidth, widened by replication on chip
  pcie_aggregate,  // SW<->HW channels share the PCIe link
};

std::string_view to_string(CapKind kind);

/// Per-process decisions aligned with ProblemSpec::processes: 0 = SW,
/// r >= 1 = HW(r), kUndecided = still open (only meaningful for bounds).
using Replicas = std::vector<int>;
inline constexpr int kUndecided = -1;

/// Precomputed cap ingredients in one number type. Every cap is derived from
/// these with the same operation order, so the double and exact routes agree
/// up to rounding and partial evaluations stay monotone.
template <class Num>
struct CapParams {
  std::vector<std::optional<Num>> sw_cap;   // sw_throughput / q
  std::vector<Num> sw_load;                 // q / sw_throughput, 0 if unbounded
  std::vector<std::vector<Num>> hw_cap;     // [p][r-1] = T(r) / q
  std::vector<std::optional<Num>> hw_cap_max;
  std::vector<std::optional<Num>> channel_unit_cap;  // bandwidth / demand
  std::vector<Num> channel_demand;          // bytes per iteration: q_u*prod*bytes
  Num cpu_cores{};
  std::optional<Num> pcie_bandwidth;
};

/// A problem compiled for repeated evaluation: repetition vector, index
/// tables, and cap parameters in double and exact form.
class ThroughputModel {
 public:
  /// Requires a problem whose structure is valid (see validate_problem).
  explicit ThroughputModel(ProblemSpec problem);

  const ProblemSpec& problem() const { return problem_; }
  const RepetitionVector& repetition() const { return repetition_; }
  int process_count() const {
    return static_cast<int>(problem_.processes.size());
  }
  int channel_count() const { return static_cast<int>(problem_.channels.size()); }
  int sink_index() const { return sink_; }
  int producer(int channel) const { return producer_[channel]; }
  int consumer(int channel) const { return consumer_[channel]; }

  bool allows_sw(int p) const { return problem_.processes[p].allows_sw(); }
  bool allows_hw(int p) const { return problem_.processes[p].allows_hw(); }
  int r_max(int p) const { return r_max_[p]; }

  /// Converts a complete assignment; throws AssignmentError on missing or
  /// unknown processes, pin violations and r_max violations.
  Replicas resolve(const Assignment& assignment) const;

  /// Like resolve, but processes absent from the map become kUndecided.
  Replicas resolve_partial(const Assignment& assignment) const;

  Assignment to_assignment(std::span<const int> replicas) const;

  /// Resources used by decided HW processes plus the minimum that undecided
  /// pinned-HW processes must take (R = 1), per kind in resource_kinds order.
  std::vector<std::int64_t> committed_resources(
      std::span<const int> replicas) const;
  bool fits(std::span<const int> replicas) const;
  const std::vector<std::int64_t>& capacity() const { return capacity_; }

  /// Calls fn(kind, subject, cap) for every finite cap. subject is a process
  /// index, a channel index, or -1 for the aggregates. Undecided processes
  /// contribute optimistic caps and are left out of shared budgets, so on a
  /// partial assignment the minimum is an admissible bound; on a complete one
  /// it is exactly lambda.
  template <class Num, class Fn>
  void visit_caps(const CapParams<Num>& params, std::span<const int> replicas,
                  Fn&& fn) const;

  /// Minimum cap (nullopt = no finite cap).
  template <class Num>
  std::optional<Num> min_cap(const CapParams<Num>& params,
                             std::span<const int> replicas) const;

  std::optional<double> lambda(std::span<const int> replicas) const {
    return min_cap(fast_, replicas);
  }
  std::optional<Rational> exact_lambda(std::span<const int> replicas) const {
    return min_cap(exact_, replicas);
  }

  const CapParams<double>& fast() const { return fast_; }
  const CapParams<Rational>& exact() const { return exact_; }

 private:
  enum class Side { sw, hw, open };

  Side side(int p, int decision) const {
    if (decision == kUndecided) {
      if (!allows_hw(p)) return Side::sw;
      if (!allows_sw(p)) return Side::hw;
      return Side::open;
    }
    return decision > 0 ? Side::hw : Side::sw;
  }

  int max_replicas(int p, int decision) const {
    if (decision == kUndecided) return allows_hw(p) ? r_max_[p] : 0;
    return decision;
  }

  template <class Num>
  CapParams<Num> build_params() const;

  ProblemSpec problem_;
  RepetitionVector repetition_;
  std::vector<int> producer_;
  std::vector<int> consumer_;
  std::vector<int> r_max_;
  int sink_ = 0;
  std::vector<std::int64_t> capacity_;
  // [p][k]: fixed and per-replica resource amounts.
  std::vector<std::vector<std::int64_t>> res_fixed_;
  std::vector<std::vector<std::int64_t>> res_per_replica_;
  CapParams<double> fast_;
  CapParams<Rational> exact_;
};

template <class Num, class Fn>
void ThroughputModel::visit_caps(const CapParams<Num>& params,
                                 std::span<const int> replicas,
                                 Fn&& fn) const {
  const int n = static_cast<int>(replicas.size());

  // Per-process caps.
  for (int p = 0; p < n; ++p) {
    const int d = replicas[p];
    if (d == kUndecided) {
      std::optional<Num> best;
      if (allows_sw(p)) {
        if (!params.sw_cap[p]) continue;  // unbounded SW option
        best = params.sw_cap[p];
      }
      if (allows_hw(p) && params.hw_cap_max[p] &&
          (!best || *params.hw_cap_max[p] > *best)) {
        fn(CapKind::hw_replicas, p, *params.hw_cap_max[p]);
      } else if (best) {
        fn(CapKind::sw_core, p, *best);
      }
    } else if (d == 0) {
      if (params.sw_cap[p]) fn(CapKind::sw_core, p, *params.sw_cap[p]);
    } else {
      fn(CapKind::hw_replicas, p, params.hw_cap[p][d - 1]);
    }
  }

  // CPU aggregate over processes known to run in software.
  Num load{};
  bool any_load = false;
  for (int p = 0; p < n; ++p) {
    if (side(p, replicas[p]) == Side::sw && params.sw_cap[p]) {
      load += params.sw_load[p];
      any_load = true;
    }
  }
  if (any_load) fn(CapKind::cpu_aggregate, -1, params.cpu_cores / load);

  // Per-channel bandwidth, optimistic scaling for open endpoints.
  const int m = channel_count();
  for (int c = 0; c < m; ++c) {
    if (!params.channel_unit_cap[c]) continue;
    const int u = producer_[c];
    const int v = consumer_[c];
    int scale = 1;
    if (problem_.channels[c].scale_with_replication &&
        side(u, replicas[u]) != Side::sw && side(v, replicas[v]) != Side::sw) {
      scale = std::max(1, std::min(max_replicas(u, replicas[u]),
                                   max_replicas(v, replicas[v])));
    }
    fn(CapKind::channel, c, *params.channel_unit_cap[c] * Num(scale));
  }

  // PCIe aggregate over channels whose crossing status is already forced.
  if (params.pcie_bandwidth) {
    Num demand{};
    bool any_crossing = false;
    for (int c = 0; c < m; ++c) {
      const Side su = side(producer_[c], replicas[producer_[c]]);
      const Side sv = side(consumer_[c], replicas[consumer_[c]]);
      if (su != Side::open && sv != Side::open && su != sv) {
        demand += params.channel_demand[c];
        any_crossing = true;
      }
    }
    if (any_crossing) {
      fn(CapKind::pcie_aggregate, -1, *params.pcie_bandwidth / demand);
    }
  }
}

template <class Num>
std::optional<Num> ThroughputModel::min_cap(const CapParams<Num>& params,
                                            std::span<const int> replicas) const {
  std::optional<Num> best;
  visit_caps(params, replicas, [&](CapKind, int, const Num& cap) {
    if (!best || cap < *best) best = cap;
  });
  return best;
}

}  // namespace streampart
