#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "streampart/model.hpp"

namespace streampart {

/// Emits the partitioning problem as a mixed-integer program in LP text
/// format (MAXIMIZE / SUBJECT TO / BOUNDS / BINARIES / END). Deterministic.
/// See docs/lp-format.md for the formulation and its counting formulas.
std::string export_milp(const ProblemSpec& problem);

struct LpTerm {
  double coefficient = 0;
  std::string variable;
};

struct LpRow {
  std::string name;
  std::vector<LpTerm> terms;
  std::string sense;  // "<=", ">=", "="
  double rhs = 0;
};

struct LpBound {
  double lower = 0;
  double upper = 0;
  bool has_upper = false;
};

/// Structure recovered from LP text by check_lp.
struct LpModel {
  std::string objective_sense;  // "MAXIMIZE" or "MINIMIZE"
  std::vector<LpTerm> objective;
  std::vector<LpRow> rows;
  std::map<std::string, LpBound> bounds;
  std::vector<std::string> binaries;
  std::vector<std::string> variables;  // first-appearance order

  std::size_t variable_count() const { return variables.size(); }
  std::size_t row_count() const { return rows.size(); }
};

/// Structural checker for the subset of LP format export_milp writes: section
/// order, row syntax, unique row names, and every binary/bounded variable
/// appearing in the objective or a row. Throws ParseError.
LpModel check_lp(std::string_view text);

}  // namespace streampart
