#include <catch_amalgamated.hpp>
#include <functional>

#include "fixtures.hpp"
#include "generator.hpp"
#include "streampart/error.hpp"
#include "streampart/validate.hpp"

using namespace streampart;
using namespace streampart::testing;

namespace {

bool mentions(const std::vector<Diagnostic>& diagnostics, const std::string& text) {
  for (const auto& d : diagnostics) {
    if (d.is_error() && d.message.find(text) != std::string::npos) return true;
  }
  return false;
}

ProcessSpec& first_with(ProblemSpec& p, Placement placement) {
  for (auto& proc : p.processes) {
    if (proc.placement == placement) return proc;
  }
  auto& proc = p.processes[1];
  proc.placement = placement;
  if (!proc.hw_profile) {
    proc.hw_profile = HwProfile{Rational(100), {{"lut", 1}}, {{"lut", 1}}, 1, {}};
  }
  return proc;
}

}  // namespace

TEST_CASE("valid chain has no errors") {
  const auto d = validate_problem(load_problem("chain_sw.json"));
  CHECK_FALSE(has_errors(d));
  CHECK_NOTHROW(require_valid(load_problem("chain_sw.json")));
}

TEST_CASE("cycles are reported with the loop") {
  const auto d = validate_problem(load_problem("cyclic.json"));
  CHECK(mentions(d, "graph must be acyclic"));
  CHECK(mentions(d, "A -> B -> A"));
  CHECK_THROWS_AS(require_valid(load_problem("cyclic.json")), ValidationError);
}

TEST_CASE("channel naming a nonexistent process is an error") {
  auto p = load_problem("chain_sw.json");
  p.channels[1].consumer = "Z";
  CHECK(has_errors(validate_problem(p)));
}

TEST_CASE("inconsistent rates are an error naming a channel") {
  CHECK(mentions(validate_problem(load_problem("diamond.json")), "inconsistent rates"));
}

TEST_CASE("suspicious but legal inputs give warnings") {
  auto p = load_problem("chain_sw.json");
  p.processes[0].hw_profile = HwProfile{Rational(10), {}, {{"lut", 5}}, 2, {}};
  auto d = validate_problem(p);
  CHECK_FALSE(has_errors(d));
  CHECK(std::any_of(d.begin(), d.end(), [](const Diagnostic& x) { return !x.is_error(); }));

  auto q = load_problem("single_kernel.json");
  q.processes[1].hw_profile->resource_fixed.clear();
  q.processes[1].hw_profile->resource_per_replica.clear();
  d = validate_problem(q);
  CHECK_FALSE(has_errors(d));
  CHECK(std::any_of(d.begin(), d.end(), [](const Diagnostic& x) { return !x.is_error(); }));
}

TEST_CASE("generated instances validate") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const auto p = random_problem(rng);
    const auto d = validate_problem(p);
    INFO(format_diagnostics(d));
    REQUIRE_FALSE(has_errors(d));
  }
}

TEST_CASE("every invariant-breaking single-field mutation is rejected") {
  using Mutation = std::function<void(ProblemSpec&)>;
  const std::vector<std::pair<const char*, Mutation>> mutations = {
      {"cpu_cores zero", [](ProblemSpec& p) { p.platform.cpu_cores = 0; }},
      {"negative capacity", [](ProblemSpec& p) { p.platform.fpga_capacity["lut"] = -1; }},
      {"capacity for undeclared kind", [](ProblemSpec& p) { p.platform.fpga_capacity["qubits"] = 3; }},
      {"missing capacity", [](ProblemSpec& p) { p.platform.fpga_capacity.erase("bram"); }},
      {"duplicate resource kind", [](ProblemSpec& p) { p.platform.resource_kinds.push_back("lut"); }},
      {"pcie zero", [](ProblemSpec& p) { p.platform.pcie_bandwidth = Limit::of(0); }},
      {"duplicate process id", [](ProblemSpec& p) { p.processes[1].id = p.processes[0].id; }},
      {"unbounded free process",
       [](ProblemSpec& p) { first_with(p, Placement::free).sw_throughput = Limit::unbounded(); }},
      {"sw throughput zero", [](ProblemSpec& p) { p.processes[0].sw_throughput = Limit::of(0); }},
      {"free without profile", [](ProblemSpec& p) { first_with(p, Placement::free).hw_profile.reset(); }},
      {"pinned hw without profile",
       [](ProblemSpec& p) { first_with(p, Placement::pinned_hw).hw_profile.reset(); }},
      {"base throughput zero",
       [](ProblemSpec& p) { first_with(p, Placement::free).hw_profile->base_throughput = 0; }},
      {"r_max zero", [](ProblemSpec& p) { first_with(p, Placement::free).hw_profile->r_max = 0; }},
      {"negative per-replica resource",
       [](ProblemSpec& p) { first_with(p, Placement::free).hw_profile->resource_per_replica["lut"] = -5; }},
      {"resource of undeclared kind",
       [](ProblemSpec& p) { first_with(p, Placement::free).hw_profile->resource_fixed["qubits"] = 1; }},
      {"table length mismatch",
       [](ProblemSpec& p) {
         auto& hw = *first_with(p, Placement::free).hw_profile;
         hw.throughput_table.assign(hw.r_max + 1, Rational(5));
       }},
      {"duplicate channel id", [](ProblemSpec& p) { p.channels[1].id = p.channels[0].id; }},
      {"unknown producer", [](ProblemSpec& p) { p.channels[0].producer = "nobody"; }},
      {"self loop", [](ProblemSpec& p) { p.channels[0].consumer = p.channels[0].producer; }},
      {"prod rate zero", [](ProblemSpec& p) { p.channels[0].prod_rate = 0; }},
      {"cons rate negative", [](ProblemSpec& p) { p.channels[0].cons_rate = -1; }},
      {"token bytes zero", [](ProblemSpec& p) { p.channels[0].token_bytes = 0; }},
      {"bandwidth zero", [](ProblemSpec& p) { p.channels[0].bandwidth_cap = Limit::of(0); }},
      {"unknown sink", [](ProblemSpec& p) { p.sink = "nowhere"; }},
      {"sink with outgoing channel", [](ProblemSpec& p) { p.sink = p.channels[0].producer; }},
      {"disconnected process",
       [](ProblemSpec& p) {
         ProcessSpec lone;
         lone.id = "lonely";
         lone.sw_throughput = Limit::of(1);
         p.processes.push_back(lone);
       }},
      {"parallel channel with another ratio",
       [](ProblemSpec& p) {
         ChannelSpec twin = p.channels[0];
         twin.id = "twin";
         twin.prod_rate *= 7;
         p.channels.push_back(twin);
       }},
      {"cycle",
       [](ProblemSpec& p) {
         ChannelSpec back = p.channels.back();
         std::swap(back.producer, back.consumer);
         std::swap(back.prod_rate, back.cons_rate);
         back.id = "back";
         p.channels.push_back(back);
       }},
  };

  std::mt19937_64 rng(5);
  for (int round = 0; round < 20; ++round) {
    const auto base = random_problem(rng);
    REQUIRE_FALSE(has_errors(validate_problem(base)));
    for (const auto& [name, mutate] : mutations) {
      INFO(name);
      auto p = base;
      mutate(p);
      CHECK(has_errors(validate_problem(p)));
    }
  }
}
