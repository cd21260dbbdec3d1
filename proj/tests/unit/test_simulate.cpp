#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "generator.hpp"
#include "streampart/error.hpp"
#include "streampart/simulate.hpp"

using namespace streampart;
using namespace streampart::testing;

namespace {

const Assignment kChainSw = {{"A", Decision::software()}, {"B", Decision::software()}, {"C", Decision::software()}};

SimConfig config(double duration = 1000, std::int64_t buffer = 64) {
  SimConfig c;
  c.duration = duration;
  c.warmup = duration / 10;
  c.buffer_tokens = buffer;
  return c;
}

void check_conservation(const SimReport& r) {
  for (const auto& c : r.channels) {
    INFO(c.channel);
    REQUIRE(c.produced - c.consumed == c.final_tokens);
    REQUIRE(c.final_tokens >= 0);
  }
}

}  // namespace

TEST_CASE("software chain runs at its slowest process") {
  const auto p = load_problem("chain_sw.json");
  const auto e = evaluate(p, kChainSw);
  const auto r = simulate(p, kChainSw, config());
  CHECK(std::abs(r.measured_throughput - *e.throughput_lambda) <= 0.05 * *e.throughput_lambda);
  CHECK(r.measured_throughput <= 1.01 * *e.throughput_lambda);
  check_conservation(r);
  for (const auto& u : r.utilization) CHECK((u.fraction >= 0 && u.fraction <= 1));
}

TEST_CASE("unbounded source feeding a rate-limited sink") {
  auto p = load_problem("chain_sw.json");
  p.processes.pop_back();
  p.channels.pop_back();
  p.sink = "B";
  p.processes[0].sw_throughput = Limit::unbounded();
  const Assignment a{{"A", Decision::software()}, {"B", Decision::software()}};
  const auto r = simulate(p, a, config());
  CHECK(r.measured_throughput == Catch::Approx(100).epsilon(0.05));
}

TEST_CASE("configuration errors") {
  const auto p = load_problem("chain_sw.json");
  auto p2 = p;
  p2.channels[0].prod_rate = 8;
  p2.channels[0].cons_rate = 8;
  CHECK_THROWS_AS(simulate(p2, kChainSw, config(1000, 4)), SimulationConfigError);
  SimConfig bad = config();
  bad.warmup = 1000;
  CHECK_THROWS_AS(simulate(p, kChainSw, bad), SimulationConfigError);
  bad.warmup = -1;
  CHECK_THROWS_AS(simulate(p, kChainSw, bad), SimulationConfigError);
  CHECK_THROWS_AS(simulate(p, kChainSw, config(0)), SimulationConfigError);
  auto infeasible = load_problem("single_kernel.json");
  infeasible.platform.fpga_capacity["lut"] = 1000;
  CHECK_THROWS_AS(simulate(infeasible, {{"A", Decision::software()}, {"B", Decision::hardware(1)}, {"C", Decision::software()}},
                           config()),
                  Infeasible);
}

TEST_CASE("tight buffers on mismatched rates deadlock with a named cycle") {
  auto p = load_problem("chain_sw.json");
  p.processes.pop_back();
  p.channels.pop_back();
  p.sink = "B";
  p.channels[0].prod_rate = 2;
  p.channels[0].cons_rate = 3;
  try {
    simulate(p, {{"A", Decision::software()}, {"B", Decision::software()}}, config(100, 3));
    FAIL("expected Deadlock");
  } catch (const Deadlock& e) {
    const std::string message = e.what();
    CHECK(message.find("B (needs tokens on c1)") != std::string::npos);
    CHECK(message.find("A (needs space on c1)") != std::string::npos);
  }
}

TEST_CASE("hardware kernel behind the PCIe link") {
  const auto p = load_problem("single_kernel.json");
  auto q = p;
  q.platform.pcie_bandwidth = Limit::of(1'000'000);
  const Assignment a{{"A", Decision::software()}, {"B", Decision::hardware(2)}, {"C", Decision::software()}};
  const auto e = evaluate(q, a);
  const auto r = simulate(q, a, config(200));
  CHECK(r.measured_throughput == Catch::Approx(*e.throughput_lambda).epsilon(0.02));
  check_conservation(r);
}

TEST_CASE("reports are deterministic and traces are CSV") {
  const auto p = load_problem("single_kernel.json");
  const Assignment a{{"A", Decision::software()}, {"B", Decision::hardware(3)}, {"C", Decision::software()}};
  auto c = config(20);
  c.trace = true;
  const auto r1 = simulate(p, a, c);
  const auto r2 = simulate(p, a, c);
  CHECK(report_to_json(r1).dump() == report_to_json(r2).dump());
  const auto csv = trace_to_csv(r1.trace);
  CHECK(csv.rfind("time,event_kind,entity_id,detail\n", 0) == 0);
  CHECK(csv == trace_to_csv(r2.trace));
  CHECK(r1.trace.size() > 100);
}

TEST_CASE("jitter is seeded") {
  const auto p = load_problem("chain_sw.json");
  auto c = config(100);
  c.jitter = 0.2;
  c.seed = 9;
  const auto a = simulate(p, kChainSw, c);
  const auto b = simulate(p, kChainSw, c);
  CHECK(a.measured_throughput == b.measured_throughput);
  CHECK(a.measured_throughput == Catch::Approx(100).epsilon(0.1));
}

TEST_CASE("compare arithmetic") {
  Evaluation e;
  e.feasible = true;
  e.throughput_lambda = 100;
  SimReport r;
  r.measured_throughput = 95;
  auto c = compare(e, r);
  CHECK(c.pass);
  CHECK(c.relative_error == Catch::Approx(0.05));
  r.measured_throughput = 80;
  CHECK_FALSE(compare(e, r).pass);
  r.measured_throughput = 100;
  c = compare(e, r);
  CHECK(c.pass);
  CHECK(c.relative_error == 0);
  e.throughput_lambda = 0;
  CHECK_THROWS_AS(compare(e, r), InputError);
  e.throughput_lambda.reset();
  CHECK_THROWS_AS(compare(e, r), InputError);
}

TEST_CASE("conservation, upper bound and convergence on random instances") {
  std::mt19937_64 rng(51);
  GeneratorOptions options;
  options.max_free = 4;
  int checked = 0;
  for (int i = 0; i < 40 && checked < 12; ++i) {
    const auto p = random_problem(rng, options);
    const auto a = random_feasible_assignment(rng, p);
    const auto e = evaluate(p, a);
    const double lambda = *e.throughput_lambda;
    const auto& q = e.sink_rate;
    if (*q * 100 > 20000 || *q * 100 < 500) continue;  // keep runs short but not sparse
    const auto short_run = simulate(p, a, config(100, 64));
    const auto long_run = simulate(p, a, config(200, 128));
    check_conservation(short_run);
    check_conservation(long_run);
    REQUIRE(short_run.measured_throughput <= 1.01 * lambda);
    REQUIRE(long_run.measured_throughput <= 1.01 * lambda);
    REQUIRE(std::abs(long_run.measured_throughput - lambda) <=
            std::abs(short_run.measured_throughput - lambda) + 0.005 * lambda);
    ++checked;
  }
  CHECK(checked >= 5);
}
