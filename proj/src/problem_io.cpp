#include "streampart/problem_io.hpp"

#include <charconv>
#include <limits>
#include <set>

#include "streampart/error.hpp"

namespace streampart {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::pair<std::size_t, std::size_t> line_column(std::string_view text,
                                                std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto [line, column] = line_column(text, e.byte);
    std::string what = e.what();
    // drop nlohmann's "[json.exception.parse_error.101] parse error at ..." prefix
    if (auto pos = what.find(": syntax error"); pos != std::string::npos) {
      what = what.substr(pos + 2);
    }
    throw ParseError(what, line, column);
  }
}

/// Reads the members of one JSON object, rejecting unknown keys.
class ObjectReader {
 public:
  ObjectReader(const json& value, std::string path)
      : value_(value), path_(std::move(path)) {
    if (!value_.is_object()) fail(path_, "expected an object");
  }

  ~ObjectReader() = default;

  bool has(const char* key) const { return value_.contains(key); }

  const json& required(const char* key) {
    seen_.insert(key);
    if (!value_.contains(key)) fail(path_, std::string("missing required field \"") + key + "\"");
    return value_.at(key);
  }

  const json* optional(const char* key) {
    seen_.insert(key);
    auto it = value_.find(key);
    return it == value_.end() ? nullptr : &*it;
  }

  std::string field(const char* key) const { return path_ + "." + key; }
  const std::string& path() const { return path_; }

  /// Call after reading all known fields.
  void finish() const {
    for (auto it = value_.begin(); it != value_.end(); ++it) {
      if (!seen_.count(it.key())) fail(path_, "unknown field \"" + it.key() + "\"");
    }
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& message) {
    throw ParseError(path + ": " + message);
  }

 private:
  const json& value_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string read_string(const json& value, const std::string& path) {
  if (!value.is_string()) ObjectReader::fail(path, "expected a string");
  return value.get<std::string>();
}

std::int64_t read_integer(const json& value, const std::string& path) {
  if (value.is_number_unsigned()) {
    auto v = value.get<std::uint64_t>();
    if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      ObjectReader::fail(path, "integer out of range");
    }
    return static_cast<std::int64_t>(v);
  }
  if (value.is_number_integer()) return value.get<std::int64_t>();
  ObjectReader::fail(path, "expected an integer");
}

bool read_bool(const json& value, const std::string& path) {
  if (!value.is_boolean()) ObjectReader::fail(path, "expected true or false");
  return value.get<bool>();
}

Rational read_rational(const json& value, const std::string& path) {
  try {
    if (value.is_number_unsigned()) return Rational(value.get<std::uint64_t>());
    if (value.is_number_integer()) return Rational(value.get<std::int64_t>());
    if (value.is_number_float()) {
      // shortest round-trip decimal, so 0.1 means 1/10
      char buffer[64];
      auto res = std::to_chars(buffer, buffer + sizeof buffer, value.get<double>());
      return parse_rational(std::string_view(buffer, res.ptr - buffer));
    }
    if (value.is_string()) return parse_rational(value.get<std::string>());
  } catch (const InputError& e) {
    ObjectReader::fail(path, e.what());
  }
  ObjectReader::fail(path, "expected a number or a \"p/q\" string");
}

Limit read_limit(const json& value, const std::string& path) {
  if (value.is_string() && value.get<std::string>() == "unbounded") {
    return Limit::unbounded();
  }
  return Limit::of(read_rational(value, path));
}

ResourceVector read_resources(const json& value, const std::string& path) {
  if (!value.is_object()) ObjectReader::fail(path, "expected an object of resource amounts");
  ResourceVector out;
  for (auto it = value.begin(); it != value.end(); ++it) {
    out[it.key()] = read_integer(it.value(), path + "." + it.key());
  }
  return out;
}

HwProfile read_hw_profile(const json& value, const std::string& path) {
  ObjectReader r(value, path);
  HwProfile hw;
  hw.base_throughput = read_rational(r.required("base_throughput"), r.field("base_throughput"));
  if (auto* v = r.optional("resource_fixed")) hw.resource_fixed = read_resources(*v, r.field("resource_fixed"));
  if (auto* v = r.optional("resource_per_replica")) {
    hw.resource_per_replica = read_resources(*v, r.field("resource_per_replica"));
  }
  const auto r_max = read_integer(r.required("r_max"), r.field("r_max"));
  if (r_max > 1'000'000 || r_max < -1'000'000) {
    ObjectReader::fail(r.field("r_max"), "out of range");
  }
  hw.r_max = static_cast<int>(r_max);
  if (auto* v = r.optional("throughput_table")) {
    if (!v->is_array()) ObjectReader::fail(r.field("throughput_table"), "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      hw.throughput_table.push_back(
          read_rational((*v)[i], r.field("throughput_table") + "[" + std::to_string(i) + "]"));
    }
  }
  r.finish();
  return hw;
}

PlatformSpec read_platform(const json& value) {
  ObjectReader r(value, "platform");
  PlatformSpec platform;
  platform.cpu_cores = read_rational(r.required("cpu_cores"), r.field("cpu_cores"));
  const auto& kinds = r.required("resource_kinds");
  if (!kinds.is_array()) ObjectReader::fail(r.field("resource_kinds"), "expected an array of names");
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    platform.resource_kinds.push_back(
        read_string(kinds[i], r.field("resource_kinds") + "[" + std::to_string(i) + "]"));
  }
  platform.fpga_capacity = read_resources(r.required("fpga_capacity"), r.field("fpga_capacity"));
  platform.pcie_bandwidth = read_limit(r.required("pcie_bandwidth"), r.field("pcie_bandwidth"));
  r.finish();
  return platform;
}

ProcessSpec read_process(const json& value, std::size_t index) {
  std::string path = "processes[" + std::to_string(index) + "]";
  ObjectReader r(value, path);
  ProcessSpec p;
  p.id = read_string(r.required("id"), r.field("id"));
  path = "processes[" + p.id + "]";
  p.sw_throughput = read_limit(r.required("sw_throughput"), path + ".sw_throughput");
  if (auto* v = r.optional("hw_profile")) p.hw_profile = read_hw_profile(*v, path + ".hw_profile");
  if (auto* v = r.optional("placement")) {
    auto placement = placement_from_string(read_string(*v, path + ".placement"));
    if (!placement) {
      ObjectReader::fail(path + ".placement", "expected pinned_sw, pinned_hw or free");
    }
    p.placement = *placement;
  } else {
    p.placement = p.hw_profile ? Placement::free : Placement::pinned_sw;
  }
  r.finish();
  return p;
}

ChannelSpec read_channel(const json& value, std::size_t index) {
  ObjectReader r(value, "channels[" + std::to_string(index) + "]");
  ChannelSpec c;
  c.id = read_string(r.required("id"), r.field("id"));
  const std::string path = "channels[" + c.id + "]";
  c.producer = read_string(r.required("producer"), path + ".producer");
  c.consumer = read_string(r.required("consumer"), path + ".consumer");
  c.prod_rate = read_integer(r.required("prod_rate"), path + ".prod_rate");
  c.cons_rate = read_integer(r.required("cons_rate"), path + ".cons_rate");
  c.token_bytes = read_integer(r.required("token_bytes"), path + ".token_bytes");
  if (auto* v = r.optional("bandwidth_cap")) c.bandwidth_cap = read_limit(*v, path + ".bandwidth_cap");
  if (auto* v = r.optional("scale_with_replication")) {
    c.scale_with_replication = read_bool(*v, path + ".scale_with_replication");
  }
  r.finish();
  return c;
}

ordered_json resources_to_json(const ResourceVector& resources,
                               const std::vector<std::string>& order) {
  ordered_json out = ordered_json::object();
  for (const auto& kind : order) {
    if (auto it = resources.find(kind); it != resources.end()) out[kind] = it->second;
  }
  for (const auto& [kind, amount] : resources) {
    if (!out.contains(kind)) out[kind] = amount;
  }
  return out;
}

}  // namespace

ProblemSpec parse_problem(std::string_view text) {
  const json doc = parse_json(text);
  ObjectReader r(doc, "problem");
  if (auto* v = r.optional("format_version")) {
    if (read_integer(*v, "format_version") != kProblemFormatVersion) {
      ObjectReader::fail("format_version", "unsupported version");
    }
  }

  ProblemSpec problem;
  problem.platform = read_platform(r.required("platform"));

  const auto& processes = r.required("processes");
  if (!processes.is_array()) ObjectReader::fail("processes", "expected an array");
  std::set<std::string> process_ids;
  for (std::size_t i = 0; i < processes.size(); ++i) {
    auto p = read_process(processes[i], i);
    if (!process_ids.insert(p.id).second) {
      ObjectReader::fail("processes[" + std::to_string(i) + "]", "duplicate process id \"" + p.id + "\"");
    }
    problem.processes.push_back(std::move(p));
  }

  const auto& channels = r.required("channels");
  if (!channels.is_array()) ObjectReader::fail("channels", "expected an array");
  std::set<std::string> channel_ids;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    auto c = read_channel(channels[i], i);
    if (!channel_ids.insert(c.id).second) {
      ObjectReader::fail("channels[" + std::to_string(i) + "]", "duplicate channel id \"" + c.id + "\"");
    }
    problem.channels.push_back(std::move(c));
  }

  problem.sink = read_string(r.required("sink"), "sink");

  if (auto* v = r.optional("provenance")) {
    if (!v->is_object()) ObjectReader::fail("provenance", "expected an object of strings");
    for (auto it = v->begin(); it != v->end(); ++it) {
      problem.provenance[it.key()] = read_string(it.value(), "provenance." + it.key());
    }
  }
  r.finish();
  return problem;
}

ordered_json rational_to_json(const Rational& value) {
  const auto num = boost::multiprecision::numerator(value);
  if (boost::multiprecision::denominator(value) == 1 &&
      num >= std::numeric_limits<std::int64_t>::min() &&
      num <= std::numeric_limits<std::int64_t>::max()) {
    return num.convert_to<std::int64_t>();
  }
  return format_rational(value);
}

ordered_json limit_to_json(const Limit& value) {
  if (value.is_unbounded()) return "unbounded";
  return rational_to_json(value.value());
}

ordered_json problem_to_json(const ProblemSpec& problem) {
  const auto& kinds = problem.platform.resource_kinds;
  ordered_json doc;
  doc["format_version"] = kProblemFormatVersion;

  ordered_json platform;
  platform["cpu_cores"] = rational_to_json(problem.platform.cpu_cores);
  platform["resource_kinds"] = kinds;
  platform["fpga_capacity"] = resources_to_json(problem.platform.fpga_capacity, kinds);
  platform["pcie_bandwidth"] = limit_to_json(problem.platform.pcie_bandwidth);
  doc["platform"] = std::move(platform);

  ordered_json processes = ordered_json::array();
  for (const auto& p : problem.processes) {
    ordered_json jp;
    jp["id"] = p.id;
    jp["placement"] = std::string(to_string(p.placement));
    jp["sw_throughput"] = limit_to_json(p.sw_throughput);
    if (p.hw_profile) {
      const auto& hw = *p.hw_profile;
      ordered_json jh;
      jh["base_throughput"] = rational_to_json(hw.base_throughput);
      jh["resource_fixed"] = resources_to_json(hw.resource_fixed, kinds);
      jh["resource_per_replica"] = resources_to_json(hw.resource_per_replica, kinds);
      jh["r_max"] = hw.r_max;
      if (!hw.throughput_table.empty()) {
        ordered_json table = ordered_json::array();
        for (const auto& t : hw.throughput_table) table.push_back(rational_to_json(t));
        jh["throughput_table"] = std::move(table);
      }
      jp["hw_profile"] = std::move(jh);
    }
    processes.push_back(std::move(jp));
  }
  doc["processes"] = std::move(processes);

  ordered_json channels = ordered_json::array();
  for (const auto& c : problem.channels) {
    ordered_json jc;
    jc["id"] = c.id;
    jc["producer"] = c.producer;
    jc["consumer"] = c.consumer;
    jc["prod_rate"] = c.prod_rate;
    jc["cons_rate"] = c.cons_rate;
    jc["token_bytes"] = c.token_bytes;
    jc["bandwidth_cap"] = limit_to_json(c.bandwidth_cap);
    jc["scale_with_replication"] = c.scale_with_replication;
    channels.push_back(std::move(jc));
  }
  doc["channels"] = std::move(channels);
  doc["sink"] = problem.sink;
  if (!problem.provenance.empty()) {
    ordered_json prov = ordered_json::object();
    for (const auto& [k, v] : problem.provenance) prov[k] = v;
    doc["provenance"] = std::move(prov);
  }
  return doc;
}

std::string serialize_problem(const ProblemSpec& problem) {
  return problem_to_json(problem).dump(2) + "\n";
}

Assignment parse_assignment(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("assignment: expected an object of process decisions");
  Assignment out;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string path = "assignment." + it.key();
    const json& v = it.value();
    if (v.is_string()) {
      if (v.get<std::string>() != "sw") ObjectReader::fail(path, "expected \"sw\" or {\"hw\": R}");
      out[it.key()] = Decision::software();
      continue;
    }
    ObjectReader r(v, path);
    const auto replicas = read_integer(r.required("hw"), path + ".hw");
    r.finish();
    if (replicas < 1 || replicas > 1'000'000) {
      ObjectReader::fail(path + ".hw", "replication factor must be a positive integer");
    }
    out[it.key()] = Decision::hardware(static_cast<int>(replicas));
  }
  return out;
}

ordered_json assignment_to_json(const Assignment& assignment) {
  ordered_json out = ordered_json::object();
  for (const auto& [id, decision] : assignment) {
    if (decision.is_hardware()) {
      out[id] = ordered_json{{"hw", decision.replicas}};
    } else {
      out[id] = "sw";
    }
  }
  return out;
}

std::string serialize_assignment(const Assignment& assignment) {
  return assignment_to_json(assignment).dump(2) + "\n";
}

}  // namespace streampart
