#pragma once

#include <string>
#include <vector>

#include "streampart/model.hpp"

namespace streampart {

struct Diagnostic {
  enum class Severity { error, warning };

  Severity severity = Severity::error;
  std::string location;  // e.g. "processes[B].hw_profile"
  std::string message;

  bool is_error() const { return severity == Severity::error; }
};

/// Checks every structural and semantic invariant of a problem. Returns all
/// findings; the problem is usable iff none has error severity.
std::vector<Diagnostic> validate_problem(const ProblemSpec& problem);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

/// "error: processes[B]: message" per line.
std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics);

/// Throws ValidationError listing all errors, if any.
void require_valid(const ProblemSpec& problem);

}  // namespace streampart
