#pragma once

#include <string>
#include <string_view>

#include "json.hpp"
#include "streampart/model.hpp"

namespace streampart {

inline constexpr int kProblemFormatVersion = 1;

/// Parses a problem file, filling documented defaults. Throws ParseError on
/// syntax errors (with line/column), unknown or missing fields, wrong types,
/// and duplicate ids. Semantic checks are left to validate_problem.
ProblemSpec parse_problem(std::string_view text);

/// Canonical JSON form; every defaultable field is written explicitly.
nlohmann::ordered_json problem_to_json(const ProblemSpec& problem);
std::string serialize_problem(const ProblemSpec& problem);

/// Assignment file: {"B": {"hw": 2}, "A": "sw"}.
Assignment parse_assignment(std::string_view text);
nlohmann::ordered_json assignment_to_json(const Assignment& assignment);
std::string serialize_assignment(const Assignment& assignment);

/// JSON encoding of rationals: integers as numbers, others as "p/q" strings.
nlohmann::ordered_json rational_to_json(const Rational& value);
nlohmann::ordered_json limit_to_json(const Limit& value);

}  // namespace streampart
