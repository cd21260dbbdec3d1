#include <catch_amalgamated.hpp>
#include <numeric>

#include "fixtures.hpp"
#include "generator.hpp"
#include "oracle.hpp"
#include "streampart/error.hpp"
#include "streampart/rates.hpp"

using namespace streampart;
using namespace streampart::testing;

namespace {

ProblemSpec chain(std::vector<std::pair<int, int>> rates) {
  ProblemSpec p;
  p.platform.cpu_cores = 1;
  p.platform.pcie_bandwidth = Limit::unbounded();
  for (std::size_t i = 0; i <= rates.size(); ++i) {
    ProcessSpec proc;
    proc.id = std::string(1, static_cast<char>('A' + i));
    proc.sw_throughput = Limit::of(10);
    p.processes.push_back(proc);
  }
  for (std::size_t i = 0; i < rates.size(); ++i) {
    ChannelSpec c;
    c.id = "c" + std::to_string(i);
    c.producer = p.processes[i].id;
    c.consumer = p.processes[i + 1].id;
    c.prod_rate = rates[i].first;
    c.cons_rate = rates[i].second;
    p.channels.push_back(c);
  }
  p.sink = p.processes.back().id;
  return p;
}

}  // namespace

TEST_CASE("unit rates give the all-ones vector") {
  const auto q = repetition_vector(chain({{1, 1}, {1, 1}}));
  CHECK(q.counts == std::vector<std::int64_t>{1, 1, 1});
}

TEST_CASE("multirate chain gives the minimal solution") {
  const auto q = repetition_vector(chain({{2, 1}, {1, 3}}));
  CHECK(q.at("A") == 3);
  CHECK(q.at("B") == 6);
  CHECK(q.at("C") == 2);
}

TEST_CASE("contradictory diamond reports a witness channel") {
  try {
    repetition_vector(load_problem("diamond.json"));
    FAIL("expected InconsistentRates");
  } catch (const InconsistentRates& e) {
    CHECK_FALSE(e.witness_channel().empty());
    CHECK(std::string(e.what()).find("inconsistent rates") != std::string::npos);
  }
}

TEST_CASE("overflowing counts are reported") {
  std::vector<std::pair<int, int>> rates(40, {1, 1'000'003});
  CHECK_THROWS_AS(repetition_vector(chain(rates)), ArithmeticOverflow);
}

TEST_CASE("balance, minimality, scaling invariance and oracle agreement") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    auto p = random_problem(rng);
    const auto q = repetition_vector(p);
    std::int64_t g = 0;
    for (auto v : q.counts) g = std::gcd(g, v);
    REQUIRE(g == 1);
    for (const auto& c : p.channels) {
      REQUIRE(q.at(c.producer) * c.prod_rate == q.at(c.consumer) * c.cons_rate);
    }
    const auto reference = oracle_repetition(p);
    for (std::size_t k = 0; k < q.size(); ++k) REQUIRE(q[k] == reference.at(q.ids[k]));

    const int factor = uniform_int(rng, 2, 9);
    for (auto& c : p.channels) {
      c.prod_rate *= factor;
      c.cons_rate *= factor;
    }
    REQUIRE(repetition_vector(p) == q);
  }
}
