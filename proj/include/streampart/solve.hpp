#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "streampart/evaluate.hpp"
#include "streampart/model.hpp"

namespace streampart {

struct SolveStats {
  std::string solver;
  std::uint64_t nodes_explored = 0;
  std::uint64_t nodes_pruned = 0;
  std::uint64_t leaves_evaluated = 0;  // complete assignments that fit the FPGA
  double wall_time = 0;                // seconds
};

struct Solution {
  Assignment assignment;
  Evaluation evaluation;
  SolveStats stats;
};

struct ExhaustiveOptions {
  std::uint64_t limit = 10'000'000;
  int workers = 1;
};

/// Enumerates every assignment. Ties in lambda go to fewer HW processes, then
/// smaller total R, then smaller summed FPGA resources, then the
/// lexicographically smallest assignment (process order, SW < HW(1) < ...).
/// Throws SearchSpaceTooLarge, Infeasible, UnboundedThroughput.
Solution solve_exhaustive(const ProblemSpec& problem,
                          const ExhaustiveOptions& options = {});

/// Depth-first branch-and-bound; returns the same optimum as
/// solve_exhaustive. Throws Infeasible, UnboundedThroughput.
Solution solve_bnb(const ProblemSpec& problem);

/// Admissible bound on lambda over all feasible completions of `partial`
/// (processes absent from the map are open). nullopt means unbounded; 0 means
/// no completion fits the FPGA.
std::optional<Rational> upper_bound(const ProblemSpec& problem,
                                    const Assignment& partial);

/// Solution file; wall_time is included only when `with_timing` is set so
/// repeated runs produce identical bytes.
nlohmann::ordered_json solution_to_json(const Solution& solution,
                                        bool with_timing = false);

}  // namespace streampart
