#include "streampart/validate.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "streampart/error.hpp"
#include "streampart/rates.hpp"

namespace streampart {

namespace {

class Collector {
 public:
  void error(std::string location, std::string message) {
    out_.push_back({Diagnostic::Severity::error, std::move(location), std::move(message)});
  }
  void warning(std::string location, std::string message) {
    out_.push_back({Diagnostic::Severity::warning, std::move(location), std::move(message)});
  }
  std::vector<Diagnostic> take() { return std::move(out_); }
  bool has_errors() const { return streampart::has_errors(out_); }

 private:
  std::vector<Diagnostic> out_;
};

void check_limit(Collector& diag, const Limit& limit, const std::string& where) {
  if (limit.is_finite() && limit.value() <= 0) {
    diag.error(where, "must be positive or \"unbounded\"");
  }
}

void check_resources(Collector& diag, const ResourceVector& resources,
                     const std::set<std::string>& kinds, const std::string& where) {
  for (const auto& [kind, amount] : resources) {
    if (!kinds.count(kind)) diag.error(where, "undeclared resource kind \"" + kind + "\"");
    if (amount < 0) diag.error(where + "." + kind, "resource amount must be >= 0");
  }
}

bool all_zero(const ResourceVector& resources) {
  return std::all_of(resources.begin(), resources.end(),
                     [](const auto& kv) { return kv.second == 0; });
}

void check_platform(Collector& diag, const PlatformSpec& platform) {
  if (platform.cpu_cores <= 0) diag.error("platform.cpu_cores", "must be positive");
  std::set<std::string> kinds;
  for (const auto& kind : platform.resource_kinds) {
    if (kind.empty()) diag.error("platform.resource_kinds", "empty resource kind name");
    if (!kinds.insert(kind).second) {
      diag.error("platform.resource_kinds", "duplicate resource kind \"" + kind + "\"");
    }
  }
  for (const auto& kind : platform.resource_kinds) {
    if (!platform.fpga_capacity.count(kind)) {
      diag.error("platform.fpga_capacity", "no capacity for resource kind \"" + kind + "\"");
    }
  }
  check_resources(diag, platform.fpga_capacity, kinds, "platform.fpga_capacity");
  check_limit(diag, platform.pcie_bandwidth, "platform.pcie_bandwidth");
}

void check_process(Collector& diag, const ProcessSpec& p, const std::set<std::string>& kinds) {
  const std::string where = "processes[" + p.id + "]";
  if (p.id.empty()) diag.error(where, "empty process id");
  check_limit(diag, p.sw_throughput, where + ".sw_throughput");
  if (p.sw_throughput.is_unbounded() && p.placement != Placement::pinned_sw) {
    diag.error(where + ".sw_throughput", "\"unbounded\" is only allowed for pinned_sw processes");
  }
  if (p.placement != Placement::pinned_sw && !p.hw_profile) {
    diag.error(where, std::string(to_string(p.placement)) + " process requires a hw_profile");
  }
  if (p.placement == Placement::pinned_sw && p.hw_profile) {
    diag.warning(where + ".hw_profile", "ignored because the process is pinned_sw");
  }
  if (!p.hw_profile) return;

  const auto& hw = *p.hw_profile;
  const std::string hw_where = where + ".hw_profile";
  if (hw.base_throughput <= 0) diag.error(hw_where + ".base_throughput", "must be positive");
  if (hw.r_max < 1) diag.error(hw_where + ".r_max", "must be >= 1");
  check_resources(diag, hw.resource_fixed, kinds, hw_where + ".resource_fixed");
  check_resources(diag, hw.resource_per_replica, kinds, hw_where + ".resource_per_replica");
  if (all_zero(hw.resource_fixed) && all_zero(hw.resource_per_replica)) {
    diag.warning(hw_where, "hardware kernel uses no FPGA resources");
  }
  if (!hw.throughput_table.empty()) {
    if (static_cast<int>(hw.throughput_table.size()) != hw.r_max) {
      diag.error(hw_where + ".throughput_table", "must have exactly r_max entries");
    }
    for (const auto& t : hw.throughput_table) {
      if (t <= 0) {
        diag.error(hw_where + ".throughput_table", "entries must be positive");
        break;
      }
    }
  }
}

/// Directed cycle search; returns the cycle as process ids, first repeated last.
std::vector<std::string> find_cycle(const ProblemSpec& problem,
                                    const std::map<std::string, std::size_t>& index) {
  const std::size_t n = problem.processes.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& c : problem.channels) {
    auto u = index.find(c.producer);
    auto v = index.find(c.consumer);
    if (u != index.end() && v != index.end()) succ[u->second].push_back(v->second);
  }
  std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::size_t> stack;
  std::vector<std::string> cycle;
  std::function<bool(std::size_t)> dfs = [&](std::size_t u) {
    state[u] = 1;
    stack.push_back(u);
    for (auto v : succ[u]) {
      if (state[v] == 1) {
        auto it = std::find(stack.begin(), stack.end(), v);
        for (; it != stack.end(); ++it) cycle.push_back(problem.processes[*it].id);
        cycle.push_back(problem.processes[v].id);
        return true;
      }
      if (state[v] == 0 && dfs(v)) return true;
    }
    stack.pop_back();
    state[u] = 2;
    return false;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (state[i] == 0 && dfs(i)) break;
  }
  return cycle;
}

bool weakly_connected(const ProblemSpec& problem, const std::map<std::string, std::size_t>& index) {
  const std::size_t n = problem.processes.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (const auto& c : problem.channels) {
    auto u = index.find(c.producer);
    auto v = index.find(c.consumer);
    if (u != index.end() && v != index.end()) parent[find(u->second)] = find(v->second);
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (find(i) != find(0)) return false;
  }
  return true;
}

}  // namespace

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.is_error(); });
}

std::vector<Diagnostic> validate_problem(const ProblemSpec& problem) {
  Collector diag;
  check_platform(diag, problem.platform);
  const std::set<std::string> kinds(problem.platform.resource_kinds.begin(),
                                    problem.platform.resource_kinds.end());

  if (problem.processes.empty()) diag.error("processes", "at least one process is required");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < problem.processes.size(); ++i) {
    const auto& p = problem.processes[i];
    if (!index.emplace(p.id, i).second) {
      diag.error("processes[" + p.id + "]", "duplicate process id \"" + p.id + "\"");
    }
    check_process(diag, p, kinds);
  }

  bool graph_ok = true;
  std::set<std::string> channel_ids;
  for (const auto& c : problem.channels) {
    const std::string where = "channels[" + c.id + "]";
    if (c.id.empty()) diag.error(where, "empty channel id");
    if (!channel_ids.insert(c.id).second) diag.error(where, "duplicate channel id \"" + c.id + "\"");
    for (const auto* end : {&c.producer, &c.consumer}) {
      if (!index.count(*end)) {
        diag.error(where, "unknown process \"" + *end + "\"");
        graph_ok = false;
      }
    }
    if (c.producer == c.consumer) {
      diag.error(where, "self-loop on process \"" + c.producer + "\"");
      graph_ok = false;
    }
    if (c.prod_rate <= 0) { diag.error(where + ".prod_rate", "must be a positive integer"); graph_ok = false; }
    if (c.cons_rate <= 0) { diag.error(where + ".cons_rate", "must be a positive integer"); graph_ok = false; }
    if (c.token_bytes <= 0) diag.error(where + ".token_bytes", "must be a positive integer");
    check_limit(diag, c.bandwidth_cap, where + ".bandwidth_cap");
  }

  if (!index.count(problem.sink)) {
    diag.error("sink", "unknown process \"" + problem.sink + "\"");
  } else {
    for (const auto& c : problem.channels) {
      if (c.producer == problem.sink) {
        diag.error("sink", "sink \"" + problem.sink + "\" has outgoing channel \"" + c.id + "\"");
      }
    }
  }

  if (!problem.processes.empty() && index.size() == problem.processes.size()) {
    if (!weakly_connected(problem, index)) {
      diag.error("channels", "graph must be weakly connected");
      graph_ok = false;
    }
    if (auto cycle = find_cycle(problem, index); !cycle.empty()) {
      std::string path;
      for (const auto& id : cycle) path += (path.empty() ? "" : " -> ") + id;
      diag.error("channels", "graph must be acyclic (cycle " + path + ")");
      graph_ok = false;
    }
    if (graph_ok) {
      try {
        repetition_vector(problem);
      } catch (const InconsistentRates& e) {
        diag.error("channels[" + e.witness_channel() + "]", e.what());
      } catch (const InputError& e) {
        diag.error("channels", e.what());
      }
    }
  }
  return diag.take();
}

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics) {
  std::ostringstream os;
  for (const auto& d : diagnostics) {
    os << (d.is_error() ? "error" : "warning") << ": " << d.location << ": " << d.message << "\n";
  }
  return os.str();
}

void require_valid(const ProblemSpec& problem) {
  auto diagnostics = validate_problem(problem);
  if (!has_errors(diagnostics)) return;
  std::vector<Diagnostic> errors;
  for (auto& d : diagnostics) {
    if (d.is_error()) errors.push_back(std::move(d));
  }
  std::string text = format_diagnostics(errors);
  if (!text.empty() && text.back() == '\n') text.pop_back();
  throw ValidationError("invalid problem:\n" + text);
}

}  // namespace streampart
