#include "streampart/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "streampart/calibrate.hpp"
#include "streampart/error.hpp"
#include "streampart/evaluate.hpp"
#include "streampart/milp.hpp"
#include "streampart/problem_io.hpp"
#include "streampart/rates.hpp"
#include "streampart/simulate.hpp"
#include "streampart/solve.hpp"
#include "streampart/validate.hpp"

namespace streampart::cli {

namespace {

using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6g", value);
  return buffer;
}

/// Result of one command: text for humans, JSON for --json, files to write.
struct Output {
  int code = kSuccess;
  std::string text;
  ordered_json json;
  std::vector<std::pair<std::string, std::string>> files;
};

struct Options {
  std::string problem;
  std::string assignment;
  std::string out;
  std::string solver = "bnb";
  std::uint64_t limit = ExhaustiveOptions{}.limit;
  int workers = 1;
  bool timing = false;
  bool verbose = false;
  SimConfig sim;
  double warmup = -1;
  std::string trace;
  std::string measurements;
};

std::string assignment_text(const Assignment& a) {
  std::string out;
  for (const auto& [id, d] : a) out += "  " + id + ": " + to_string(d) + "\n";
  return out;
}

Output cmd_validate(const Options& o) {
  const auto problem = parse_problem(read_file(o.problem));
  const auto diagnostics = validate_problem(problem);
  Output r;
  ordered_json list = ordered_json::array();
  for (const auto& d : diagnostics) {
    list.push_back({{"severity", d.is_error() ? "error" : "warning"},
                    {"location", d.location},
                    {"message", d.message}});
  }
  r.json["valid"] = !has_errors(diagnostics);
  r.json["diagnostics"] = list;
  r.text = format_diagnostics(diagnostics);
  if (has_errors(diagnostics)) {
    r.code = kInvalidInput;
    return r;
  }
  r.text += "OK\n";
  if (o.verbose) {
    const auto q = repetition_vector(problem);
    ordered_json qj = ordered_json::object();
    r.text += "repetition vector:\n";
    for (std::size_t i = 0; i < q.size(); ++i) {
      r.text += "  " + q.ids[i] + ": " + std::to_string(q[i]) + "\n";
      qj[q.ids[i]] = q[i];
    }
    r.json["repetition_vector"] = qj;
  }
  return r;
}

Output cmd_evaluate(const Options& o) {
  const auto problem = parse_problem(read_file(o.problem));
  const auto assignment = parse_assignment(read_file(o.assignment));
  const auto e = evaluate(problem, assignment);
  Output r;
  r.json = evaluation_to_json(e);
  r.text = explain(e);
  if (!e.feasible) {
    r.code = kModelFailure;
    return r;
  }
  if (!o.out.empty()) r.files.push_back({o.out, r.json.dump(2) + "\n"});
  return r;
}

Output cmd_optimize(const Options& o) {
  const auto problem = parse_problem(read_file(o.problem));
  Solution s;
  if (o.solver == "bnb") {
    s = solve_bnb(problem);
  } else {
    s = solve_exhaustive(problem, {o.limit, o.workers});
  }
  Output r;
  r.json = solution_to_json(s, o.timing);
  r.text = "solver: " + s.stats.solver + "\nassignment:\n" + assignment_text(s.assignment) +
           explain(s.evaluation) + "nodes explored " + std::to_string(s.stats.nodes_explored) +
           ", pruned " + std::to_string(s.stats.nodes_pruned) + ", leaves evaluated " +
           std::to_string(s.stats.leaves_evaluated) + "\n";
  if (!o.out.empty()) r.files.push_back({o.out, r.json.dump(2) + "\n"});
  return r;
}

Output cmd_simulate(const Options& o) {
  const auto problem = parse_problem(read_file(o.problem));
  const auto assignment = parse_assignment(read_file(o.assignment));
  SimConfig config = o.sim;
  if (o.warmup >= 0) config.warmup = o.warmup;
  config.trace = !o.trace.empty();
  const auto report = simulate(problem, assignment, config);
  const auto evaluation = evaluate(problem, assignment);
  const auto cmp = compare(evaluation, report);

  Output r;
  r.json["report"] = report_to_json(report);
  r.json["comparison"] = comparison_to_json(cmp);
  std::ostringstream os;
  os << "measured = " << number(report.measured_throughput) << " iterations/s over "
     << number(report.window) << " s (" << report.sink_firings << " sink firings)\n"
     << "predicted lambda = " << number(cmp.predicted) << ", relative error "
     << number(cmp.relative_error) << " -> " << (cmp.pass ? "pass" : "fail") << "\n"
     << "utilization:\n";
  for (const auto& u : report.utilization) os << "  " << u.budget << " " << number(u.fraction) << "\n";
  os << "channels:\n";
  for (const auto& c : report.channels) {
    os << "  " << c.channel << " mean " << number(c.mean_tokens) << " tokens, produced "
       << c.produced << ", consumed " << c.consumed << "\n";
  }
  os << report.event_count << " events\n";
  r.text = os.str();
  if (!o.out.empty()) r.files.push_back({o.out, r.json.dump(2) + "\n"});
  if (!o.trace.empty()) r.files.push_back({o.trace, trace_to_csv(report.trace)});
  return r;
}

Output cmd_export_lp(const Options& o) {
  const auto problem = parse_problem(read_file(o.problem));
  const std::string lp = export_milp(problem);
  const auto structure = check_lp(lp);
  Output r;
  r.json["variables"] = structure.variable_count();
  r.json["rows"] = structure.row_count();
  if (o.out.empty()) {
    r.text = lp;
    r.json["lp"] = lp;
  } else {
    r.files.push_back({o.out, lp});
    r.text = "wrote " + o.out + " (" + std::to_string(structure.variable_count()) + " variables, " +
             std::to_string(structure.row_count()) + " rows)\n";
  }
  return r;
}

Output cmd_calibrate(const Options& o) {
  const auto base = parse_problem(read_file(o.problem));
  const auto calibrated = calibrate(read_file(o.measurements), base);
  require_valid(calibrated);
  Output r;
  r.json = problem_to_json(calibrated);
  const std::string text = serialize_problem(calibrated);
  if (o.out.empty()) {
    r.text = text;
  } else {
    r.files.push_back({o.out, text});
    r.text = "wrote " + o.out + "\n";
  }
  return r;
}

void write_files(const Output& output) {
  for (const auto& [path, content] : output.files) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f || !(f << content) || !f.flush()) throw InputError("cannot write " + path);
  }
}

std::string version_text() {
  return std::string("streampart ") + STREAMPART_VERSION + " (problem format " +
         std::to_string(kProblemFormatVersion) + ")";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hardware/software partitioning planner for streaming applications", "streampart"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  bool json = false;
  bool version = false;
  app.add_flag("--json", json, "Print machine-readable JSON on stdout");
  app.add_flag("--version", version, "Print tool and file format versions");

  Options o;
  std::map<CLI::App*, std::function<Output(const Options&)>> commands;

  auto* validate = app.add_subcommand("validate", "Check a problem file");
  validate->add_option("problem", o.problem, "Problem file")->required();
  validate->add_flag("--verbose", o.verbose, "Also print the repetition vector");
  commands[validate] = cmd_validate;

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Predict throughput of an assignment");
  evaluate_cmd->add_option("problem", o.problem, "Problem file")->required();
  evaluate_cmd->add_option("--assignment", o.assignment, "Assignment file")->required();
  evaluate_cmd->add_option("--out", o.out, "Write evaluation JSON here");
  commands[evaluate_cmd] = cmd_evaluate;

  auto* optimize = app.add_subcommand("optimize", "Find the throughput-maximal assignment");
  optimize->add_option("problem", o.problem, "Problem file")->required();
  optimize->add_option("--solver", o.solver, "bnb or exhaustive")
      ->check(CLI::IsMember({"bnb", "exhaustive"}));
  optimize->add_option("--limit", o.limit, "Exhaustive search-space limit")->check(CLI::PositiveNumber);
  optimize->add_option("--workers", o.workers, "Exhaustive search threads")->check(CLI::Range(1, 256));
  optimize->add_flag("--timing", o.timing, "Include wall time in the solution file");
  optimize->add_option("--out", o.out, "Write solution JSON here");
  commands[optimize] = cmd_optimize;

  auto* sim = app.add_subcommand("simulate", "Run the discrete-event simulator");
  sim->add_option("problem", o.problem, "Problem file")->required();
  sim->add_option("--assignment", o.assignment, "Assignment file")->required();
  sim->add_option("--duration", o.sim.duration, "Virtual seconds");
  sim->add_option("--warmup", o.warmup, "Virtual seconds discarded (default duration/10)");
  sim->add_option("--buffer", o.sim.buffer_tokens, "Per-channel FIFO capacity in tokens");
  sim->add_option("--jitter", o.sim.jitter, "Relative service-time jitter (default 0)");
  sim->add_option("--seed", o.sim.seed, "Jitter seed");
  sim->add_option("--trace", o.trace, "Write event trace CSV here");
  sim->add_option("--out", o.out, "Write report JSON here");
  commands[sim] = cmd_simulate;

  auto* lp = app.add_subcommand("export-lp", "Write the MILP model in LP format");
  lp->add_option("problem", o.problem, "Problem file")->required();
  lp->add_option("--out", o.out, "Write the model here (default stdout)");
  commands[lp] = cmd_export_lp;

  auto* cal = app.add_subcommand("calibrate", "Fit parameters from profiling measurements");
  cal->add_option("measurements", o.measurements, "Measurement CSV")->required();
  cal->add_option("--problem", o.problem, "Base problem file")->required();
  cal->add_option("--out", o.out, "Write the calibrated problem here (default stdout)");
  commands[cal] = cmd_calibrate;

  auto fail = [&](int code, const std::string& message, bool usage) {
    err << message << "\n";
    if (usage) err << app.help();
    if (json) out << ordered_json{{"error", message}, {"exit_code", code}}.dump(2) << "\n";
    return code;
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    // --json is parsed before help fires only if it came first; check the raw args too.
    json = json || std::find(args.begin(), args.end(), "--json") != args.end();
    const std::string help = app.help();
    if (json) {
      out << ordered_json{{"help", help}}.dump(2) << "\n";
    } else {
      out << help;
    }
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    json = json || std::find(args.begin(), args.end(), "--json") != args.end();
    return fail(kInvalidInput, e.what(), true);
  }

  if (version) {
    if (json) {
      out << ordered_json{{"tool", "streampart"},
                          {"version", STREAMPART_VERSION},
                          {"format_version", kProblemFormatVersion}}
                 .dump(2)
          << "\n";
    } else {
      out << version_text() << "\n";
    }
    return kSuccess;
  }

  CLI::App* chosen = nullptr;
  for (auto& [sub, fn] : commands) {
    if (sub->parsed()) chosen = sub;
  }
  if (!chosen) return fail(kInvalidInput, "a subcommand is required", true);

  try {
    Output result = commands[chosen](o);
    if (result.code == kSuccess) write_files(result);
    if (json) {
      if (result.code != kSuccess) {
        result.json["exit_code"] = result.code;
      }
      out << result.json.dump(2) << "\n";
    } else if (result.code == kSuccess) {
      out << result.text;
    } else {
      err << result.text;
    }
    return result.code;
  } catch (const Error& e) {
    const int code = e.category() == ErrorCategory::model ? kModelFailure : kInvalidInput;
    return fail(code, std::string("error: ") + e.what(), false);
  } catch (const std::exception& e) {
    return fail(kInternalError, std::string("internal error: ") + e.what(), false);
  }
}

}  // namespace streampart::cli
