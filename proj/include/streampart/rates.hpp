#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "streampart/model.hpp"

namespace streampart {

/// Minimal positive firing counts per graph iteration, aligned with
/// ProblemSpec::processes. Process p fires q_p * lambda times per second.
struct RepetitionVector {
  std::vector<std::string> ids;
  std::vector<std::int64_t> counts;

  std::int64_t at(std::string_view id) const;
  std::int64_t operator[](std::size_t index) const { return counts[index]; }
  std::size_t size() const { return counts.size(); }

  bool operator==(const RepetitionVector& other) const = default;
};

/// Solves q_u * prod_rate = q_v * cons_rate for every channel exactly.
/// Requires a weakly connected graph whose channels name existing processes.
/// Throws InconsistentRates (with a witness channel) when only the zero
/// solution exists, ArithmeticOverflow when counts exceed 64 bits, and
/// InputError for structural problems.
RepetitionVector repetition_vector(const ProblemSpec& problem);

}  // namespace streampart
