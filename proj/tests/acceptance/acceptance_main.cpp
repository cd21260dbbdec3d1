// Acceptance gate: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "fixtures.hpp"
#include "generator.hpp"
#include "lp_formula.hpp"
#include "oracle.hpp"
#include "streampart/cli.hpp"
#include "streampart/error.hpp"
#include "streampart/evaluate.hpp"
#include "streampart/milp.hpp"
#include "streampart/problem_io.hpp"
#include "streampart/simulate.hpp"
#include "streampart/solve.hpp"
#include "streampart/throughput_model.hpp"

using namespace streampart;
using namespace streampart::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string summary;
  std::vector<std::string> failures;

  void fail(const std::string& what) {
    pass = false;
    if (failures.size() < 5) failures.push_back(what);
  }
};

std::vector<fs::path> corpus_files() {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(std::string(STREAMPART_TEST_DATA) + "/corpus")) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string describe(const Assignment& a) {
  std::string out;
  for (const auto& [id, d] : a) out += id + "=" + to_string(d) + " ";
  return out;
}

ProblemSpec scaled(ProblemSpec p, const Rational& k) {
  for (auto& proc : p.processes) {
    if (proc.sw_throughput.is_finite()) proc.sw_throughput = Limit::of(proc.sw_throughput.value() * k);
    if (proc.hw_profile) {
      proc.hw_profile->base_throughput *= k;
      for (auto& t : proc.hw_profile->throughput_table) t *= k;
    }
  }
  for (auto& c : p.channels) {
    if (c.bandwidth_cap.is_finite()) c.bandwidth_cap = Limit::of(c.bandwidth_cap.value() * k);
  }
  if (p.platform.pcie_bandwidth.is_finite()) {
    p.platform.pcie_bandwidth = Limit::of(p.platform.pcie_bandwidth.value() * k);
  }
  return p;
}

// 1. Branch and bound agrees with exhaustive search.
Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(1001);
  GeneratorOptions options;  // 3-7 free, r_max <= 4, mixed pins
  int agree = 0;
  for (int i = 0; i < 200; ++i) {
    const auto p = random_problem(rng, options);
    std::optional<Solution> a, b;
    bool a_infeasible = false, b_infeasible = false;
    try { a = solve_exhaustive(p); } catch (const Infeasible&) { a_infeasible = true; }
    try { b = solve_bnb(p); } catch (const Infeasible&) { b_infeasible = true; }
    if (a_infeasible || b_infeasible) {
      if (a_infeasible == b_infeasible) ++agree; else o.fail("instance " + std::to_string(i) + ": infeasibility differs");
      continue;
    }
    if (a->assignment == b->assignment && *a->evaluation.lambda_exact == *b->evaluation.lambda_exact) {
      ++agree;
    } else {
      o.fail("instance " + std::to_string(i) + ": exhaustive " + describe(a->assignment) + "vs bnb " +
             describe(b->assignment));
    }
  }
  o.summary = std::to_string(agree) + "/200 instances identical";
  return o;
}

// 2. Single free process: the optimizer picks the closed-form argmax.
Outcome single_kernel() {
  Outcome o;
  std::mt19937_64 rng(2002);
  GeneratorOptions options;
  options.min_free = 1;
  options.max_free = 1;
  options.max_pinned_sw = 3;
  options.max_pinned_hw = 0;  // the kernel is the only decision
  int agree = 0, hardware = 0;
  for (int i = 0; i < 100; ++i) {
    const auto p = random_problem(rng, options);
    const auto it = std::find_if(p.processes.begin(), p.processes.end(),
                                 [](const ProcessSpec& s) { return s.placement == Placement::free; });
    // Argmax over SW, HW(1..r_max) with the tie-break SW first, then smaller R.
    Assignment base;
    for (const auto& proc : p.processes) base[proc.id] = Decision{proc.allows_sw() ? 0 : 1};
    std::optional<Rational> best;
    int best_r = -1;
    for (int r = 0; r <= it->hw_profile->r_max; ++r) {
      auto a = base;
      a[it->id] = Decision{r};
      const auto e = oracle_evaluate(p, a);
      if (e.feasible && (!best || *e.lambda > *best)) {
        best = e.lambda;
        best_r = r;
      }
    }
    const auto s = solve_bnb(p);
    const int chosen = s.assignment.at(it->id).replicas;
    if (chosen == best_r && *s.evaluation.lambda_exact == *best) {
      ++agree;
      hardware += chosen > 0;
    } else {
      o.fail("instance " + std::to_string(i) + ": chose " + std::to_string(chosen) + ", argmax " +
             std::to_string(best_r));
    }
  }
  o.summary = std::to_string(agree) + "/100 match the argmax (" + std::to_string(hardware) + " chose hardware)";
  return o;
}

// 3. upper_bound never underestimates a feasible completion.
Outcome bound_admissibility() {
  Outcome o;
  std::mt19937_64 rng(3003);
  int triples = 0, violations = 0, attempts = 0;
  while (triples < 1000 && attempts < 100000) {
    ++attempts;
    const auto p = random_problem(rng);
    const auto completion = random_assignment(rng, p);
    Assignment partial;
    for (const auto& [id, d] : completion) {
      if (chance(rng, 0.5)) partial[id] = d;
    }
    const auto e = evaluate(p, completion);
    if (!e.feasible) continue;
    ++triples;
    const auto bound = upper_bound(p, partial);
    if (bound && *bound < *e.lambda_exact) {
      ++violations;
      o.fail("bound " + format_rational(*bound) + " < lambda " + format_rational(*e.lambda_exact));
    }
  }
  if (triples < 1000) o.fail("only " + std::to_string(triples) + " feasible triples generated");
  o.summary = std::to_string(triples) + " triples, " + std::to_string(violations) + " violations";
  return o;
}

// 4. Monotonicity, homogeneity and balance of the evaluator.
Outcome evaluator_properties() {
  Outcome o;
  std::mt19937_64 rng(4004);
  int mono = 0, homo = 0, balance = 0;

  for (int i = 0; i < 500; ++i) {
    auto p = random_problem(rng);
    const auto a = random_feasible_assignment(rng, p);
    const auto before = evaluate(p, a);
    const Rational factor(uniform_int(rng, 101, 400), 100);
    switch (uniform_int(rng, 0, 3)) {
      case 0: p.platform.cpu_cores *= factor; break;
      case 1:
        p.platform.pcie_bandwidth = p.platform.pcie_bandwidth.is_finite() && chance(rng, 0.8)
                                        ? Limit::of(p.platform.pcie_bandwidth.value() * factor)
                                        : Limit::unbounded();
        break;
      case 2: {
        const auto& kind = p.platform.resource_kinds[uniform_int(rng, 0, static_cast<int>(p.platform.resource_kinds.size()) - 1)];
        p.platform.fpga_capacity[kind] += uniform_int(rng, 1, 50'000);
        break;
      }
      default: {
        auto& c = p.channels[uniform_int(rng, 0, static_cast<int>(p.channels.size()) - 1)];
        c.bandwidth_cap = c.bandwidth_cap.is_finite() && chance(rng, 0.8)
                              ? Limit::of(c.bandwidth_cap.value() * factor)
                              : Limit::unbounded();
      }
    }
    const auto after = evaluate(p, a);
    if (after.feasible && *after.lambda_exact >= *before.lambda_exact) {
      ++mono;
    } else {
      o.fail("monotonicity trial " + std::to_string(i));
    }
  }

  for (int i = 0; i < 500; ++i) {
    const auto p = random_problem(rng);
    const Rational k(uniform_int(rng, 1, 1000), uniform_int(rng, 1, 100));
    const auto q = scaled(p, k);
    const auto a = random_feasible_assignment(rng, p);
    const auto e1 = evaluate(p, a);
    const auto e2 = evaluate(q, a);
    bool ok = *e2.lambda_exact == *e1.lambda_exact * k;
    ok = ok && std::abs(*e2.throughput_lambda - to_double(k) * *e1.throughput_lambda) <=
                   1e-9 * *e2.throughput_lambda;
    const auto b1 = e1.binding_constraints();
    const auto b2 = e2.binding_constraints();
    ok = ok && b1.size() == b2.size();
    for (std::size_t j = 0; ok && j < b1.size(); ++j) {
      ok = b1[j].kind == b2[j].kind && b1[j].subject == b2[j].subject;
    }
    if (i % 5 == 0) {  // argmax invariance, on a fifth of the trials
      const auto s1 = solve_bnb(p);
      const auto s2 = solve_bnb(q);
      ok = ok && s1.assignment == s2.assignment &&
           *s2.evaluation.lambda_exact == *s1.evaluation.lambda_exact * k;
    }
    if (ok) ++homo; else o.fail("homogeneity trial " + std::to_string(i));
  }

  for (int i = 0; i < 500; ++i) {
    const auto p = random_problem(rng);
    const ThroughputModel model(p);
    const auto a = random_feasible_assignment(rng, p);
    const auto e = evaluate(p, a);
    const Rational lambda = *e.lambda_exact;
    bool ok = true;
    for (const auto& c : p.channels) {
      const Rational produced = lambda * model.repetition().at(c.producer) * c.prod_rate;
      const Rational consumed = lambda * model.repetition().at(c.consumer) * c.cons_rate;
      ok = ok && produced == consumed;
    }
    ok = ok && std::abs(*e.sink_rate - to_double(lambda * model.repetition().at(p.sink))) <= 1e-9 * *e.sink_rate;
    if (ok) ++balance; else o.fail("balance trial " + std::to_string(i));
  }
  o.summary = "monotone " + std::to_string(mono) + "/500, homogeneous " + std::to_string(homo) +
              "/500, balanced " + std::to_string(balance) + "/500";
  return o;
}

// 5. The simulator reproduces the predicted rate.
Outcome simulator_agreement() {
  Outcome o;
  std::mt19937_64 rng(5005);
  int pairs = 0, agree = 0;
  double worst = 0;
  SimConfig config;
  config.duration = 1000;
  config.warmup = 100;
  config.buffer_tokens = 64;
  for (int attempt = 0; pairs < 50 && attempt < 5000; ++attempt) {
    auto p = random_problem(rng);
    const auto a = random_feasible_assignment(rng, p);
    const auto e0 = evaluate(p, a);
    std::vector<Rational> caps;
    for (const auto& c : e0.constraints) caps.push_back(c.cap_exact);
    std::sort(caps.begin(), caps.end());
    if (caps.size() >= 2 && caps[1] < caps[0] * Rational(105, 100)) continue;

    // Rescale rates (lambda scales exactly, caps keep their order) so every
    // run fires about the same number of events.
    const ThroughputModel model(p);
    std::int64_t total_q = 0;
    for (auto q : model.repetition().counts) total_q += q;
    p = scaled(p, Rational(1000) / (*e0.lambda_exact * total_q));
    const auto e = evaluate(p, a);
    ++pairs;
    const auto r = simulate(p, a, config);
    const double lambda = *e.throughput_lambda;
    const double error = std::abs(r.measured_throughput - lambda) / lambda;
    worst = std::max(worst, error);
    if (error <= 0.10 && r.measured_throughput <= 1.01 * lambda) {
      ++agree;
    } else {
      std::ostringstream os;
      os << "pair " << pairs << ": measured " << r.measured_throughput << " vs lambda " << lambda << " ("
         << explain(e).substr(0, explain(e).find('\n')) << ")";
      o.fail(os.str());
    }
  }
  if (pairs < 50) o.fail("only " + std::to_string(pairs) + " pairs generated");
  char worst_text[32];
  std::snprintf(worst_text, sizeof worst_text, "%.4f", worst);
  o.summary = std::to_string(agree) + "/" + std::to_string(pairs) + " within 10%, worst relative error " + worst_text;
  return o;
}

// 6. Output files are byte-identical across runs and worker counts.
Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "streampart_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ostringstream sink_out, sink_err;
  auto run = [&](std::vector<std::string> args) { return cli::run(args, sink_out, sink_err); };

  std::mt19937_64 rng(6006);
  auto files = corpus_files();
  files.resize(8);
  int compared = 0;
  for (const auto& problem_path : files) {
    const std::string problem = problem_path.string();
    const auto spec = parse_problem(slurp(problem_path));
    const std::string assignment = (dir / "assignment.json").string();
    std::ofstream(assignment) << serialize_assignment(random_feasible_assignment(rng, spec));

    std::vector<std::string> outputs;
    for (int rep = 0; rep < 3; ++rep) {
      const auto bnb = (dir / ("bnb" + std::to_string(rep) + ".json")).string();
      const auto sim = (dir / ("sim" + std::to_string(rep) + ".json")).string();
      const auto trace = (dir / ("trace" + std::to_string(rep) + ".csv")).string();
      if (run({"optimize", problem, "--out", bnb}) != 0) o.fail("optimize failed on " + problem);
      if (run({"simulate", problem, "--assignment", assignment, "--duration", "200", "--out", sim, "--trace",
               trace}) != 0) {
        o.fail("simulate failed on " + problem);
      }
      for (int workers : {1, 2, 8}) {
        const auto ex = (dir / ("ex" + std::to_string(rep) + "_" + std::to_string(workers) + ".json")).string();
        if (run({"optimize", problem, "--solver", "exhaustive", "--workers", std::to_string(workers), "--out", ex}) != 0) {
          o.fail("exhaustive failed on " + problem);
        }
      }
    }
    auto same = [&](const std::string& prefix, const std::vector<std::string>& names) {
      const auto reference = slurp(dir / names.front());
      for (const auto& n : names) {
        if (slurp(dir / n) != reference || reference.empty()) o.fail(prefix + " differs on " + problem);
        ++compared;
      }
    };
    same("bnb", {"bnb0.json", "bnb1.json", "bnb2.json"});
    same("simulate", {"sim0.json", "sim1.json", "sim2.json"});
    same("trace", {"trace0.csv", "trace1.csv", "trace2.csv"});
    std::vector<std::string> ex;
    for (int rep = 0; rep < 3; ++rep) {
      for (int workers : {1, 2, 8}) ex.push_back("ex" + std::to_string(rep) + "_" + std::to_string(workers) + ".json");
    }
    same("exhaustive", ex);
  }
  fs::remove_all(dir);
  o.summary = std::to_string(compared) + " files compared over " + std::to_string(files.size()) + " problems";
  return o;
}

// 7. parse -> serialize -> parse is the identity on the corpus.
Outcome round_trip() {
  Outcome o;
  int same = 0;
  const auto files = corpus_files();
  for (const auto& f : files) {
    const auto p = parse_problem(slurp(f));
    const auto text = serialize_problem(p);
    const auto back = parse_problem(text);
    if (back == p && serialize_problem(back) == text) ++same; else o.fail(f.filename().string());
  }
  if (files.size() != 20) o.fail("corpus has " + std::to_string(files.size()) + " files, expected 20");
  o.summary = std::to_string(same) + "/" + std::to_string(files.size()) + " files identical";
  return o;
}

// 8. LP export sizes follow the documented formulas and re-parse.
Outcome milp_structure() {
  Outcome o;
  int ok = 0;
  const auto files = corpus_files();
  for (const auto& f : files) {
    const auto p = parse_problem(slurp(f));
    try {
      const auto model = check_lp(export_milp(p));
      const auto expected = formula_counts(p);
      if (model.variable_count() == expected.variables && model.row_count() == expected.rows) {
        ++ok;
      } else {
        o.fail(f.filename().string() + ": " + std::to_string(model.variable_count()) + " vars/" +
               std::to_string(model.row_count()) + " rows, formula " + std::to_string(expected.variables) + "/" +
               std::to_string(expected.rows));
      }
    } catch (const std::exception& e) {
      o.fail(f.filename().string() + ": " + e.what());
    }
  }
  o.summary = std::to_string(ok) + "/" + std::to_string(files.size()) + " models match and re-parse";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1 oracle equivalence", oracle_equivalence},
      {"AC2 single-kernel replication", single_kernel},
      {"AC3 bound admissibility", bound_admissibility},
      {"AC4 evaluator properties", evaluator_properties},
      {"AC5 simulator agreement", simulator_agreement},
      {"AC6 determinism", determinism},
      {"AC7 format round-trip", round_trip},
      {"AC8 MILP export structure", milp_structure},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome.fail(std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.1f s", seconds);
    std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << name << ": " << outcome.summary << " (" << timing
              << ")\n";
    for (const auto& f : outcome.failures) std::cout << "       " << f << "\n";
    failed += outcome.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all acceptance criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
