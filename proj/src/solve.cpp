#include "streampart/solve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>
#include <tuple>

#include "streampart/error.hpp"
#include "streampart/problem_io.hpp"

namespace streampart {

namespace {

using Clock = std::chrono::steady_clock;

/// Secondary criteria for equal lambda; smaller is better.
struct TieKey {
  int hw_count = 0;
  std::int64_t replica_sum = 0;
  std::int64_t resource_sum = 0;

  auto operator<=>(const TieKey& other) const = default;
};

struct Leaf {
  Replicas replicas;
  double lambda = 0;
  TieKey key;
  mutable std::optional<Rational> exact;
};

/// Total order on complete assignments: lambda (exact when the floating values
/// are too close to call), then TieKey, then the replica vector itself.
class Ranker {
 public:
  explicit Ranker(const ThroughputModel& model) : model_(model) {}

  TieKey key(std::span<const int> replicas) const {
    TieKey k;
    for (int r : replicas) {
      if (r > 0) {
        ++k.hw_count;
        k.replica_sum += r;
      }
    }
    __int128 total = 0;
    for (auto used : model_.committed_resources(replicas)) total += used;
    constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
    k.resource_sum = total > kMax ? kMax : static_cast<std::int64_t>(total);
    return k;
  }

  /// Lower bound of the key over all completions of a partial assignment.
  TieKey key_lower_bound(std::span<const int> replicas) const {
    TieKey k = key(replicas);
    for (std::size_t p = 0; p < replicas.size(); ++p) {
      if (replicas[p] == kUndecided && !model_.allows_sw(static_cast<int>(p))) {
        ++k.hw_count;
        ++k.replica_sum;
      }
    }
    return k;
  }

  const Rational& exact(const Leaf& leaf) const {
    if (!leaf.exact) leaf.exact = *model_.exact_lambda(leaf.replicas);
    return *leaf.exact;
  }

  /// Sign of (a - b) on exact lambda values.
  int compare_lambda(const Leaf& a, const Leaf& b) const {
    const double tolerance = 1e-9 * std::max(a.lambda, b.lambda);
    if (a.lambda > b.lambda + tolerance) return 1;
    if (b.lambda > a.lambda + tolerance) return -1;
    const auto& ea = exact(a);
    const auto& eb = exact(b);
    return ea < eb ? -1 : (eb < ea ? 1 : 0);
  }

  bool better(const Leaf& a, const Leaf& b) const {
    if (int c = compare_lambda(a, b); c != 0) return c > 0;
    if (a.key != b.key) return a.key < b.key;
    return a.replicas < b.replicas;
  }

  /// True when no completion of `partial` (optimistic lambda `bound`) can beat
  /// `incumbent`.
  bool dominated(std::span<const int> partial, double bound, const Leaf& incumbent) const {
    const double tolerance = 1e-9 * std::max(bound, incumbent.lambda);
    if (bound < incumbent.lambda - tolerance) return true;
    if (bound > incumbent.lambda + tolerance) return false;
    const auto exact_bound = model_.exact_lambda(partial);
    const auto& best = exact(incumbent);
    if (*exact_bound < best) return true;
    if (best < *exact_bound) return false;
    // Equal lambda at best: completions can only win on the tie key.
    return incumbent.key < key_lower_bound(partial);
  }

 private:
  const ThroughputModel& model_;
};

std::vector<std::vector<int>> options_of(const ThroughputModel& model) {
  std::vector<std::vector<int>> options(model.process_count());
  for (int p = 0; p < model.process_count(); ++p) {
    if (model.allows_sw(p)) options[p].push_back(0);
    if (model.allows_hw(p)) {
      for (int r = 1; r <= model.r_max(p); ++r) options[p].push_back(r);
    }
  }
  return options;
}

Solution finish(const ThroughputModel& model, const Leaf& best, SolveStats stats,
                Clock::time_point start) {
  Solution s;
  s.assignment = model.to_assignment(best.replicas);
  s.evaluation = evaluate(model, best.replicas);
  stats.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  s.stats = std::move(stats);
  return s;
}

[[noreturn]] void throw_infeasible(const ThroughputModel& model) {
  std::string message = "infeasible: no assignment fits the FPGA";
  Replicas minimal(model.process_count(), 0);
  for (int p = 0; p < model.process_count(); ++p) {
    if (!model.allows_sw(p)) minimal[p] = 1;
  }
  const auto used = model.committed_resources(minimal);
  const auto& kinds = model.problem().platform.resource_kinds;
  for (std::size_t k = 0; k < used.size(); ++k) {
    if (used[k] > model.capacity()[k]) {
      message += "; pinned hardware needs " + std::to_string(used[k]) + " " + kinds[k] +
                 " at R=1, capacity " + std::to_string(model.capacity()[k]);
    }
  }
  throw Infeasible(message);
}

struct WorkerResult {
  std::optional<Leaf> best;
  std::uint64_t feasible = 0;
  bool unbounded = false;
};

WorkerResult scan_range(const ThroughputModel& model, const Ranker& ranker,
                        const std::vector<std::vector<int>>& options, std::uint64_t begin,
                        std::uint64_t end) {
  WorkerResult out;
  const int n = model.process_count();
  if (begin >= end) return out;

  // Mixed-radix odometer, last process varies fastest.
  std::vector<std::size_t> digit(n, 0);
  std::uint64_t rest = begin;
  for (int p = n - 1; p >= 0; --p) {
    digit[p] = rest % options[p].size();
    rest /= options[p].size();
  }
  Replicas replicas(n);
  for (int p = 0; p < n; ++p) replicas[p] = options[p][digit[p]];

  Leaf candidate;
  for (std::uint64_t i = begin; i < end; ++i) {
    if (model.fits(replicas)) {
      ++out.feasible;
      const auto lambda = model.lambda(replicas);
      if (!lambda) {
        out.unbounded = true;
        return out;
      }
      candidate.replicas = replicas;
      candidate.lambda = *lambda;
      candidate.key = ranker.key(replicas);
      candidate.exact.reset();
      if (!out.best || ranker.better(candidate, *out.best)) out.best = candidate;
    }
    for (int p = n - 1; p >= 0; --p) {
      if (++digit[p] < options[p].size()) {
        replicas[p] = options[p][digit[p]];
        break;
      }
      digit[p] = 0;
      replicas[p] = options[p][0];
    }
  }
  return out;
}

class BranchAndBound {
 public:
  explicit BranchAndBound(const ThroughputModel& model) : model_(model), ranker_(model) {
    const int n = model.process_count();
    replicas_.assign(n, kUndecided);
    for (int p = 0; p < n; ++p) {
      if (!model.allows_hw(p)) {
        replicas_[p] = 0;
      } else {
        order_.push_back(p);
      }
    }
    // Most severe software bottleneck first: ascending sw_throughput / q.
    const auto& sw = model.exact().sw_cap;
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      if (!sw[a] || !sw[b]) return sw[a].has_value() && !sw[b].has_value();
      return *sw[a] < *sw[b];
    });
  }

  void run() { descend(0); }

  const std::optional<Leaf>& best() const { return best_; }
  const SolveStats& stats() const { return stats_; }
  bool unbounded() const { return unbounded_; }

 private:
  void descend(std::size_t depth) {
    if (unbounded_) return;
    ++stats_.nodes_explored;
    if (!model_.fits(replicas_)) {
      ++stats_.nodes_pruned;
      return;
    }
    const auto bound = model_.lambda(replicas_);
    if (depth == order_.size()) {
      ++stats_.leaves_evaluated;
      if (!bound) {
        unbounded_ = true;
        return;
      }
      Leaf leaf{replicas_, *bound, ranker_.key(replicas_), std::nullopt};
      if (!best_ || ranker_.better(leaf, *best_)) best_ = std::move(leaf);
      return;
    }
    if (best_ && bound && ranker_.dominated(replicas_, *bound, *best_)) {
      ++stats_.nodes_pruned;
      return;
    }
    const int p = order_[depth];
    if (model_.allows_sw(p)) {
      replicas_[p] = 0;
      descend(depth + 1);
    }
    for (int r = model_.r_max(p); r >= 1; --r) {
      replicas_[p] = r;
      descend(depth + 1);
    }
    replicas_[p] = kUndecided;
  }

  const ThroughputModel& model_;
  Ranker ranker_;
  std::vector<int> order_;
  Replicas replicas_;
  std::optional<Leaf> best_;
  SolveStats stats_{"bnb"};
  bool unbounded_ = false;
};

}  // namespace

Solution solve_exhaustive(const ProblemSpec& problem, const ExhaustiveOptions& options) {
  const auto start = Clock::now();
  const ThroughputModel model(problem);
  const Ranker ranker(model);
  const auto choices = options_of(model);

  long double size = 1;
  std::uint64_t leaves = 1;
  for (const auto& c : choices) {
    size *= static_cast<long double>(c.size());
    if (size > static_cast<long double>(options.limit)) throw SearchSpaceTooLarge(size, options.limit);
    leaves *= c.size();
  }

  const int workers = std::max(1, options.workers);
  std::vector<WorkerResult> results(workers);
  if (workers == 1) {
    results[0] = scan_range(model, ranker, choices, 0, leaves);
  } else {
    std::vector<std::thread> threads;
    const std::uint64_t chunk = (leaves + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::uint64_t begin = std::min(leaves, chunk * w);
      const std::uint64_t end = std::min(leaves, begin + chunk);
      threads.emplace_back([&, w, begin, end] {
        results[w] = scan_range(model, ranker, choices, begin, end);
      });
    }
    for (auto& t : threads) t.join();
  }

  SolveStats stats{"exhaustive"};
  stats.nodes_explored = leaves;
  std::optional<Leaf> best;
  for (const auto& r : results) {
    if (r.unbounded) throw UnboundedThroughput();
    stats.leaves_evaluated += r.feasible;
    if (r.best && (!best || ranker.better(*r.best, *best))) best = r.best;
  }
  stats.nodes_pruned = leaves - stats.leaves_evaluated;
  if (!best) throw_infeasible(model);
  return finish(model, *best, stats, start);
}

Solution solve_bnb(const ProblemSpec& problem) {
  const auto start = Clock::now();
  const ThroughputModel model(problem);
  BranchAndBound search(model);
  search.run();
  if (search.unbounded()) throw UnboundedThroughput();
  if (!search.best()) throw_infeasible(model);
  return finish(model, *search.best(), search.stats(), start);
}

std::optional<Rational> upper_bound(const ProblemSpec& problem, const Assignment& partial) {
  const ThroughputModel model(problem);
  const auto replicas = model.resolve_partial(partial);
  if (!model.fits(replicas)) return Rational(0);
  return model.exact_lambda(replicas);
}

nlohmann::ordered_json solution_to_json(const Solution& solution, bool with_timing) {
  nlohmann::ordered_json out;
  out["format_version"] = kProblemFormatVersion;
  out["solver"] = solution.stats.solver;
  out["assignment"] = assignment_to_json(solution.assignment);
  out["evaluation"] = evaluation_to_json(solution.evaluation);
  nlohmann::ordered_json stats;
  stats["solver"] = solution.stats.solver;
  stats["nodes_explored"] = solution.stats.nodes_explored;
  stats["nodes_pruned"] = solution.stats.nodes_pruned;
  stats["leaves_evaluated"] = solution.stats.leaves_evaluated;
  if (with_timing) stats["wall_time"] = solution.stats.wall_time;
  out["stats"] = std::move(stats);
  return out;
}

}  // namespace streampart
