#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "streampart/model.hpp"

namespace streampart {

/// One profiling sample: subject_kind,subject_id,quantity,value.
struct MeasurementRecord {
  enum class Kind { process, channel };

  Kind subject_kind = Kind::process;
  std::string subject_id;
  std::string quantity;  // items | cpu_seconds (process), bytes | seconds (channel)
  Rational value;
};

/// Parses measurement CSV with header subject_kind,subject_id,quantity,value.
/// Throws CalibrationError with the offending line.
std::vector<MeasurementRecord> parse_measurements(std::string_view csv);

/// Pooled-ratio calibration: sw_throughput = sum(items) / sum(cpu_seconds),
/// bandwidth_cap = sum(bytes) / sum(seconds). Unmeasured fields are copied
/// unchanged; provenance records the row counts per subject.
ProblemSpec calibrate(const std::vector<MeasurementRecord>& measurements,
                      const ProblemSpec& base);
ProblemSpec calibrate(std::string_view csv, const ProblemSpec& base);

}  // namespace streampart
