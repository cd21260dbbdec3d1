#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "streampart/evaluate.hpp"
#include "streampart/model.hpp"

namespace streampart {

struct SimConfig {
  double duration = 1000;  // virtual seconds
  std::optional<double> warmup;  // default duration / 10
  std::int64_t buffer_tokens = 64;
  bool trace = false;
  /// Service times are scaled by a uniform factor in [1 - jitter, 1 + jitter].
  double jitter = 0;
  std::uint64_t seed = 1;

  double effective_warmup() const { return warmup.value_or(duration / 10); }
};

struct TraceEvent {
  double time = 0;
  std::string kind;  // fire_start, fire_end, transfer_end, ...
  std::string entity;
  std::string detail;
};

struct ChannelOccupancy {
  std::string channel;
  double mean_tokens = 0;
  std::int64_t produced = 0;  // tokens committed by producer firings
  std::int64_t consumed = 0;
  std::int64_t final_tokens = 0;  // in transit or waiting at the end
};

struct SimReport {
  double measured_throughput = 0;  // iterations/s after warmup
  std::int64_t sink_firings = 0;   // counted after warmup
  double window = 0;
  std::vector<BudgetUse> utilization;  // "cpu", "pcie", "hw:<id>", "channel:<id>"
  std::vector<ChannelOccupancy> channels;
  std::uint64_t event_count = 0;
  std::vector<TraceEvent> trace;
};

/// Deterministic token-level simulation of the application under a fixed
/// assignment: SW firings queue FCFS for CPU cores, HW processes have R
/// parallel servers, SW<->HW transfers serialize on one PCIe server, capped
/// channels pass through a rate limiter, and full FIFOs block producers.
/// Throws SimulationConfigError/AssignmentError for bad inputs, Infeasible or
/// UnboundedThroughput when the assignment has no finite lambda, and Deadlock
/// (naming the cycle of waits) when the run stops making progress.
SimReport simulate(const ProblemSpec& problem, const Assignment& assignment,
                   const SimConfig& config);

struct Comparison {
  double predicted = 0;
  double measured = 0;
  double relative_error = 0;
  double threshold = 0.10;
  bool pass = false;
};

/// |measured - lambda| / lambda against `threshold`. Throws InputError when
/// lambda is absent or zero.
Comparison compare(const Evaluation& evaluation, const SimReport& report,
                   double threshold = 0.10);

nlohmann::ordered_json report_to_json(const SimReport& report);
nlohmann::ordered_json comparison_to_json(const Comparison& comparison);

/// CSV with header time,event_kind,entity_id,detail.
std::string trace_to_csv(const std::vector<TraceEvent>& trace);

}  // namespace streampart
