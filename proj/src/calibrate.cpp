#include "streampart/calibrate.hpp"

#include <boost/tokenizer.hpp>
#include <map>
#include <sstream>

#include "streampart/error.hpp"

namespace streampart {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw CalibrationError("measurements line " + std::to_string(line) + ": " + message);
}

struct Totals {
  Rational numerator;    // items or bytes
  Rational denominator;  // cpu_seconds or seconds
  bool has_numerator = false;
  bool has_denominator = false;
  int rows = 0;
};

}  // namespace

std::vector<MeasurementRecord> parse_measurements(std::string_view csv) {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::vector<MeasurementRecord> out;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    try {
      Tokenizer tok(line);
      for (const auto& f : tok) fields.push_back(trim(f));
    } catch (const boost::escaped_list_error& e) {
      fail(line_no, std::string("malformed CSV: ") + e.what());
    }
    if (!header) {
      if (fields != std::vector<std::string>{"subject_kind", "subject_id", "quantity", "value"}) {
        fail(line_no, "expected header subject_kind,subject_id,quantity,value");
      }
      header = true;
      continue;
    }
    if (fields.size() != 4) fail(line_no, "expected 4 fields, got " + std::to_string(fields.size()));

    MeasurementRecord r;
    if (fields[0] == "process") {
      r.subject_kind = MeasurementRecord::Kind::process;
      if (fields[2] != "items" && fields[2] != "cpu_seconds") {
        fail(line_no, "unknown process quantity \"" + fields[2] + "\" (expected items or cpu_seconds)");
      }
    } else if (fields[0] == "channel") {
      r.subject_kind = MeasurementRecord::Kind::channel;
      if (fields[2] != "bytes" && fields[2] != "seconds") {
        fail(line_no, "unknown channel quantity \"" + fields[2] + "\" (expected bytes or seconds)");
      }
    } else {
      fail(line_no, "subject_kind must be process or channel, got \"" + fields[0] + "\"");
    }
    if (fields[1].empty()) fail(line_no, "empty subject_id");
    r.subject_id = fields[1];
    r.quantity = fields[2];
    try {
      r.value = parse_rational(fields[3]);
    } catch (const std::exception&) {
      fail(line_no, "value \"" + fields[3] + "\" is not a number");
    }
    if (r.value < 0) fail(line_no, "negative value " + fields[3]);
    out.push_back(std::move(r));
  }
  if (!header) throw CalibrationError("measurements: missing header line");
  return out;
}

ProblemSpec calibrate(const std::vector<MeasurementRecord>& measurements, const ProblemSpec& base) {
  std::map<std::string, Totals> processes;
  std::map<std::string, Totals> channels;
  for (const auto& m : measurements) {
    const bool is_process = m.subject_kind == MeasurementRecord::Kind::process;
    if (is_process && !base.find_process(m.subject_id)) {
      throw CalibrationError("measurements name unknown process \"" + m.subject_id + "\"");
    }
    if (!is_process && !base.find_channel(m.subject_id)) {
      throw CalibrationError("measurements name unknown channel \"" + m.subject_id + "\"");
    }
    auto& t = (is_process ? processes : channels)[m.subject_id];
    ++t.rows;
    if (m.quantity == "items" || m.quantity == "bytes") {
      t.numerator += m.value;
      t.has_numerator = true;
    } else {
      t.denominator += m.value;
      t.has_denominator = true;
    }
  }

  auto ratio = [](const std::string& what, const Totals& t, const char* num, const char* den) {
    if (!t.has_numerator || !t.has_denominator) {
      throw CalibrationError(what + ": needs both " + num + " and " + den + " rows");
    }
    if (t.denominator == 0) throw CalibrationError(what + ": total " + den + " is zero");
    if (t.numerator == 0) throw CalibrationError(what + ": total " + num + " is zero");
    return Rational(t.numerator / t.denominator);
  };

  ProblemSpec out = base;
  for (auto& p : out.processes) {
    auto it = processes.find(p.id);
    if (it == processes.end()) continue;
    p.sw_throughput = Limit::of(ratio("process \"" + p.id + "\"", it->second, "items", "cpu_seconds"));
    out.provenance["process:" + p.id] = "calibrated from " + std::to_string(it->second.rows) + " rows";
  }
  for (auto& c : out.channels) {
    auto it = channels.find(c.id);
    if (it == channels.end()) continue;
    c.bandwidth_cap = Limit::of(ratio("channel \"" + c.id + "\"", it->second, "bytes", "seconds"));
    out.provenance["channel:" + c.id] = "calibrated from " + std::to_string(it->second.rows) + " rows";
  }
  return out;
}

ProblemSpec calibrate(std::string_view csv, const ProblemSpec& base) {
  return calibrate(parse_measurements(csv), base);
}

}  // namespace streampart
