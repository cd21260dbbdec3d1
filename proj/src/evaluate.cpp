#include "streampart/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "streampart/error.hpp"
#include "streampart/problem_io.hpp"

namespace streampart {

namespace {

std::string_view family_label(CapKind kind) {
  switch (kind) {
    case CapKind::sw_core: return "sw core";
    case CapKind::cpu_aggregate: return "cpu aggregate";
    case CapKind::hw_replicas: return "hw replicas";
    case CapKind::channel: return "channel";
    case CapKind::pcie_aggregate: return "pcie aggregate";
  }
  return "?";
}

std::string number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6g", value);
  return buffer;
}

BudgetUse make_use(std::string budget, const Rational& fraction) {
  return {std::move(budget), to_double(fraction), fraction > 1};
}

}  // namespace

std::vector<Constraint> Evaluation::binding_constraints() const {
  std::vector<Constraint> out;
  std::copy_if(constraints.begin(), constraints.end(), std::back_inserter(out),
               [](const Constraint& c) { return c.binding; });
  return out;
}

Evaluation evaluate(const ThroughputModel& model, std::span<const int> replicas) {
  const auto& problem = model.problem();
  if (std::find(replicas.begin(), replicas.end(), kUndecided) != replicas.end() ||
      static_cast<int>(replicas.size()) != model.process_count()) {
    throw AssignmentError(AssignmentError::Kind::incomplete, "incomplete assignment");
  }

  Evaluation e;
  e.sink = problem.sink;

  const auto used = model.committed_resources(replicas);
  const auto& capacity = model.capacity();
  std::vector<BudgetUse> fpga_use;
  for (std::size_t k = 0; k < used.size(); ++k) {
    const auto& kind = problem.platform.resource_kinds[k];
    if (capacity[k] > 0) {
      fpga_use.push_back(make_use("fpga:" + kind, Rational(used[k], capacity[k])));
    } else {
      fpga_use.push_back({"fpga:" + kind, used[k] > 0 ? 2.0 : 0.0, used[k] > 0});
    }
    if (used[k] > capacity[k]) e.overfull.push_back({kind, used[k], capacity[k]});
  }
  if (!e.overfull.empty()) {
    e.feasible = false;
    e.utilization = std::move(fpga_use);
    return e;
  }

  std::optional<Rational> cpu_cap;
  std::optional<Rational> pcie_cap;
  std::vector<std::optional<Rational>> channel_cap(model.channel_count());
  model.visit_caps(model.exact(), replicas, [&](CapKind kind, int subject, const Rational& cap) {
    Constraint c;
    c.kind = kind;
    if (kind == CapKind::channel) {
      c.subject = problem.channels[subject].id;
      channel_cap[subject] = cap;
    } else if (subject >= 0) {
      c.subject = problem.processes[subject].id;
    }
    if (kind == CapKind::cpu_aggregate) cpu_cap = cap;
    if (kind == CapKind::pcie_aggregate) pcie_cap = cap;
    c.cap = to_double(cap);
    c.cap_exact = cap;
    e.constraints.push_back(std::move(c));
  });
  if (e.constraints.empty()) throw UnboundedThroughput();

  Rational lambda = e.constraints.front().cap_exact;
  for (const auto& c : e.constraints) lambda = std::min(lambda, c.cap_exact);

  const auto fast = model.lambda(replicas);
  const double reference = to_double(lambda);
  if (!fast || std::abs(*fast - reference) > kBindingTolerance * reference) {
    throw std::logic_error("floating and exact lambda disagree");
  }

  const Rational tolerance(1, 1'000'000'000);
  for (auto& c : e.constraints) c.binding = c.cap_exact - lambda <= lambda * tolerance;
  std::stable_sort(e.constraints.begin(), e.constraints.end(),
                   [](const Constraint& a, const Constraint& b) {
                     return std::tie(a.kind, a.subject) < std::tie(b.kind, b.subject);
                   });

  e.feasible = true;
  e.throughput_lambda = *fast;
  e.lambda_exact = lambda;
  e.sink_rate = *fast * static_cast<double>(model.repetition()[model.sink_index()]);

  e.utilization.push_back(make_use("cpu", cpu_cap ? Rational(lambda / *cpu_cap) : Rational(0)));
  if (problem.platform.pcie_bandwidth.is_finite()) {
    e.utilization.push_back(make_use("pcie", pcie_cap ? Rational(lambda / *pcie_cap) : Rational(0)));
  }
  for (auto& u : fpga_use) e.utilization.push_back(std::move(u));
  for (int c = 0; c < model.channel_count(); ++c) {
    if (channel_cap[c]) {
      e.utilization.push_back(make_use("channel:" + problem.channels[c].id, lambda / *channel_cap[c]));
    }
  }
  return e;
}

Evaluation evaluate(const ProblemSpec& problem, const Assignment& assignment) {
  const ThroughputModel model(problem);
  const auto replicas = model.resolve(assignment);
  return evaluate(model, replicas);
}

std::string explain(const Evaluation& e) {
  std::ostringstream os;
  if (!e.feasible) {
    os << "INFEASIBLE: FPGA resources overfull\n";
    for (const auto& o : e.overfull) {
      os << "  " << o.kind << ": used " << o.used << " of " << o.capacity << "\n";
    }
    return os.str();
  }
  os << "lambda = " << number(*e.throughput_lambda) << " iterations/s (sink " << e.sink << ": "
     << number(*e.sink_rate) << " firings/s)\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-15s %-16s %14s %12s\n", "constraint", "subject", "cap",
                "utilization");
  os << line;
  for (const auto& c : e.constraints) {
    const double use = *e.throughput_lambda / c.cap;
    std::snprintf(line, sizeof line, "%-15s %-16s %14s %12.4f%s\n",
                  std::string(family_label(c.kind)).c_str(),
                  c.subject.empty() ? "-" : c.subject.c_str(), number(c.cap).c_str(), use,
                  c.binding ? "  BINDING" : "");
    os << line;
  }
  os << "budgets:\n";
  for (const auto& u : e.utilization) {
    std::snprintf(line, sizeof line, "  %-30s %s\n", u.budget.c_str(),
                  u.over ? ">1" : number(u.fraction).c_str());
    os << line;
  }
  return os.str();
}

nlohmann::ordered_json evaluation_to_json(const Evaluation& e) {
  using nlohmann::ordered_json;
  ordered_json out;
  out["feasible"] = e.feasible;
  out["throughput_lambda"] = e.throughput_lambda ? ordered_json(*e.throughput_lambda) : ordered_json();
  out["throughput_lambda_exact"] =
      e.lambda_exact ? ordered_json(format_rational(*e.lambda_exact)) : ordered_json();
  out["sink"] = e.sink;
  out["sink_rate"] = e.sink_rate ? ordered_json(*e.sink_rate) : ordered_json();

  auto constraint_json = [](const Constraint& c, bool with_flag) {
    ordered_json j;
    j["kind"] = std::string(to_string(c.kind));
    j["subject"] = c.subject.empty() ? ordered_json() : ordered_json(c.subject);
    j["cap"] = c.cap;
    j["cap_exact"] = format_rational(c.cap_exact);
    if (with_flag) j["binding"] = c.binding;
    return j;
  };
  ordered_json binding = ordered_json::array();
  ordered_json all = ordered_json::array();
  for (const auto& c : e.constraints) {
    if (c.binding) binding.push_back(constraint_json(c, false));
    all.push_back(constraint_json(c, true));
  }
  out["binding_constraints"] = std::move(binding);
  out["constraints"] = std::move(all);

  ordered_json use = ordered_json::object();
  for (const auto& u : e.utilization) {
    use[u.budget] = u.over ? ordered_json(">1") : ordered_json(u.fraction);
  }
  out["utilization"] = std::move(use);

  ordered_json overfull = ordered_json::array();
  for (const auto& o : e.overfull) {
    overfull.push_back({{"kind", o.kind}, {"used", o.used}, {"capacity", o.capacity}});
  }
  out["overfull_resources"] = std::move(overfull);
  return out;
}

}  // namespace streampart
