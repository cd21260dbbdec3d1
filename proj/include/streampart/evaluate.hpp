#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "streampart/model.hpp"
#include "streampart/rational.hpp"
#include "streampart/throughput_model.hpp"

namespace streampart {

/// Relative tolerance under which a cap counts as binding.
inline constexpr double kBindingTolerance = 1e-9;

struct Constraint {
  CapKind kind = CapKind::sw_core;
  std::string subject;  // process or channel id; empty for aggregates
  double cap = 0;       // lambda cap, iterations/s
  Rational cap_exact;
  bool binding = false;
};

/// Fraction of one budget consumed at the achieved lambda.
struct BudgetUse {
  std::string budget;  // "cpu", "pcie", "fpga:<kind>", "channel:<id>"
  double fraction = 0;
  bool over = false;   // strictly above 1
};

struct ResourceOverflow {
  std::string kind;
  std::int64_t used = 0;
  std::int64_t capacity = 0;
};

struct Evaluation {
  bool feasible = false;
  std::optional<double> throughput_lambda;  // iterations/s
  std::optional<Rational> lambda_exact;
  std::optional<double> sink_rate;          // q_sink * lambda
  std::string sink;
  /// Every finite cap, ordered by family then subject id.
  std::vector<Constraint> constraints;
  std::vector<BudgetUse> utilization;
  std::vector<ResourceOverflow> overfull;

  std::vector<Constraint> binding_constraints() const;
};

/// Steady-state throughput of a complete assignment. Throws AssignmentError
/// for incomplete or pin/r_max-violating assignments and UnboundedThroughput
/// when no constraint is finite. FPGA overflow is reported as infeasible.
Evaluation evaluate(const ProblemSpec& problem, const Assignment& assignment);
Evaluation evaluate(const ThroughputModel& model, std::span<const int> replicas);

/// One line per constraint, BINDING markers, budget utilizations.
std::string explain(const Evaluation& evaluation);

nlohmann::ordered_json evaluation_to_json(const Evaluation& evaluation);

}  // namespace streampart
