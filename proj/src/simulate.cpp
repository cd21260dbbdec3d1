#include "streampart/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

#include "streampart/error.hpp"
#include "streampart/throughput_model.hpp"

namespace streampart {

namespace {

enum class EventKind { firing_done = 0, limiter_done = 1, pcie_done = 2 };

struct Event {
  double time;
  EventKind kind;
  int entity;
  std::uint64_t seq;
  int payload;  // core index for SW firings, token count for transfers

  bool operator>(const Event& other) const {
    return std::tie(time, kind, entity, seq) >
           std::tie(other.time, other.kind, other.entity, other.seq);
  }
};

struct Proc {
  std::string id;
  bool hardware = false;
  bool instant = false;  // unbounded software: fires in zero time, no core
  int servers = 1;
  double service = 0;  // seconds per firing (SW: on a unit-speed core)
  int running = 0;
  bool queued = false;
  double busy = 0;  // server-seconds inside the window
  std::vector<int> inputs;
  std::vector<int> outputs;
};

struct Chan {
  std::string id;
  int producer = 0;
  int consumer = 0;
  std::int64_t prod = 1;
  std::int64_t cons = 1;
  double token_bytes = 1;
  std::optional<double> limiter_rate;  // bytes/s
  bool crossing = false;
  std::int64_t occupancy = 0;  // reserved + in transit + available
  std::int64_t available = 0;
  std::int64_t produced = 0;
  std::int64_t consumed = 0;
  std::deque<int> limiter_queue;
  bool limiter_busy = false;
  double limiter_time = 0;
  double area = 0;  // integral of (produced - consumed) over the window
  double last_change = 0;
};

struct Transfer {
  int channel;
  int tokens;
};

class Simulator {
 public:
  Simulator(const ThroughputModel& model, std::span<const int> replicas, const SimConfig& config)
      : model_(model), config_(config), warmup_(config.effective_warmup()), rng_(config.seed) {
    const auto& problem = model.problem();
    const int n = model.process_count();
    const auto& q = model.repetition();
    for (int p = 0; p < n; ++p) {
      const auto& spec = problem.processes[p];
      Proc proc;
      proc.id = spec.id;
      if (replicas[p] > 0) {
        proc.hardware = true;
        proc.servers = replicas[p];
        proc.service = to_double(Rational(replicas[p]) / spec.hw_profile->throughput_at(replicas[p]));
      } else if (spec.sw_throughput.is_finite()) {
        proc.service = to_double(1 / spec.sw_throughput.value());
      } else {
        proc.instant = true;
      }
      procs_.push_back(std::move(proc));
    }
    for (int c = 0; c < model.channel_count(); ++c) {
      const auto& spec = problem.channels[c];
      Chan ch;
      ch.id = spec.id;
      ch.producer = model.producer(c);
      ch.consumer = model.consumer(c);
      ch.prod = spec.prod_rate;
      ch.cons = spec.cons_rate;
      ch.token_bytes = static_cast<double>(spec.token_bytes);
      if (spec.bandwidth_cap.is_finite()) {
        Rational rate = spec.bandwidth_cap.value();
        if (spec.scale_with_replication && replicas[ch.producer] > 0 && replicas[ch.consumer] > 0) {
          rate *= std::min(replicas[ch.producer], replicas[ch.consumer]);
        }
        ch.limiter_rate = to_double(rate);
      }
      ch.crossing = (replicas[ch.producer] > 0) != (replicas[ch.consumer] > 0);
      procs_[ch.producer].outputs.push_back(c);
      procs_[ch.consumer].inputs.push_back(c);
      chans_.push_back(std::move(ch));
    }
    if (problem.platform.pcie_bandwidth.is_finite()) {
      pcie_rate_ = to_double(problem.platform.pcie_bandwidth.value());
    }

    // Cores: floor(cpu) unit-speed cores plus one core for the fractional rest.
    const double cpu = to_double(problem.platform.cpu_cores);
    const double whole = std::floor(cpu);
    for (int i = 0; i < static_cast<int>(whole); ++i) core_speed_.push_back(1.0);
    if (cpu - whole > 1e-12) core_speed_.push_back(cpu - whole);
    core_free_.assign(core_speed_.size(), true);
    cpu_cores_ = cpu;

    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    std::sort(order_.begin(), order_.end(),
              [&](int a, int b) { return procs_[a].id < procs_[b].id; });
    sink_ = model.sink_index();
    q_sink_ = static_cast<double>(q[sink_]);
  }

  SimReport run() {
    dispatch(0);
    while (!events_.empty() && events_.top().time <= config_.duration) {
      const Event e = events_.top();
      events_.pop();
      ++report_.event_count;
      now_ = e.time;
      switch (e.kind) {
        case EventKind::firing_done: finish_firing(e); break;
        case EventKind::limiter_done: finish_limiter(e); break;
        case EventKind::pcie_done: finish_pcie(e); break;
      }
      dispatch(now_);
      if (events_.empty()) throw Deadlock(describe_deadlock());
    }
    if (events_.empty()) throw Deadlock(describe_deadlock());
    return build_report();
  }

 private:
  double window_overlap(double begin, double end) const {
    return std::max(0.0, std::min(end, config_.duration) - std::max(begin, warmup_));
  }

  double jittered(double service) {
    if (config_.jitter <= 0) return service;
    std::uniform_real_distribution<double> factor(1 - config_.jitter, 1 + config_.jitter);
    return service * factor(rng_);
  }

  void schedule(double time, EventKind kind, int entity, int payload) {
    events_.push({time, kind, entity, seq_++, payload});
  }

  void trace(const std::string& kind, const std::string& entity, const std::string& detail) {
    if (config_.trace) report_.trace.push_back({now_, kind, entity, detail});
  }

  void track(Chan& ch, std::int64_t delta_produced, std::int64_t delta_consumed) {
    ch.area += static_cast<double>(ch.produced - ch.consumed) * window_overlap(ch.last_change, now_);
    ch.last_change = now_;
    ch.produced += delta_produced;
    ch.consumed += delta_consumed;
  }

  bool ready(const Proc& p) const {
    if (p.running >= p.servers) return false;
    for (int c : p.inputs) {
      if (chans_[c].available < chans_[c].cons) return false;
    }
    for (int c : p.outputs) {
      if (chans_[c].occupancy + chans_[c].prod > config_.buffer_tokens) return false;
    }
    return true;
  }

  void take_inputs(int p) {
    for (int c : procs_[p].inputs) {
      auto& ch = chans_[c];
      ch.available -= ch.cons;
      ch.occupancy -= ch.cons;
      track(ch, 0, ch.cons);
    }
    for (int c : procs_[p].outputs) chans_[c].occupancy += chans_[c].prod;
    ++procs_[p].running;
    trace("fire_start", procs_[p].id, "running=" + std::to_string(procs_[p].running));
  }

  void emit_outputs(int p) {
    for (int c : procs_[p].outputs) {
      auto& ch = chans_[c];
      track(ch, ch.prod, 0);
      route(c, static_cast<int>(ch.prod), /*after_limiter=*/false);
    }
    if (p == sink_ && now_ > warmup_) ++report_.sink_firings;
  }

  void route(int c, int tokens, bool after_limiter) {
    auto& ch = chans_[c];
    if (!after_limiter && ch.limiter_rate) {
      ch.limiter_queue.push_back(tokens);
      start_limiter(c);
    } else if (ch.crossing && pcie_rate_) {
      pcie_queue_.push_back({c, tokens});
      start_pcie();
    } else {
      ch.available += tokens;
      trace("deliver", ch.id, "tokens=" + std::to_string(tokens));
    }
  }

  void start_limiter(int c) {
    auto& ch = chans_[c];
    if (ch.limiter_busy || ch.limiter_queue.empty()) return;
    const int tokens = ch.limiter_queue.front();
    ch.limiter_queue.pop_front();
    ch.limiter_busy = true;
    const double span = tokens * ch.token_bytes / *ch.limiter_rate;
    ch.limiter_time += window_overlap(now_, now_ + span);
    schedule(now_ + span, EventKind::limiter_done, c, tokens);
  }

  void start_pcie() {
    if (pcie_busy_ || pcie_queue_.empty()) return;
    const Transfer t = pcie_queue_.front();
    pcie_queue_.pop_front();
    pcie_busy_ = true;
    const double span = t.tokens * chans_[t.channel].token_bytes / *pcie_rate_;
    pcie_time_ += window_overlap(now_, now_ + span);
    schedule(now_ + span, EventKind::pcie_done, t.channel, t.tokens);
  }

  void finish_firing(const Event& e) {
    auto& p = procs_[e.entity];
    --p.running;
    if (!p.hardware) core_free_[e.payload] = true;
    trace("fire_end", p.id, p.hardware ? "hw" : "core=" + std::to_string(e.payload));
    emit_outputs(e.entity);
  }

  void finish_limiter(const Event& e) {
    auto& ch = chans_[e.entity];
    ch.limiter_busy = false;
    trace("limiter_done", ch.id, "tokens=" + std::to_string(e.payload));
    route(e.entity, e.payload, /*after_limiter=*/true);
    start_limiter(e.entity);
  }

  void finish_pcie(const Event& e) {
    pcie_busy_ = false;
    auto& ch = chans_[e.entity];
    ch.available += e.payload;
    trace("pcie_done", ch.id, "tokens=" + std::to_string(e.payload));
    start_pcie();
  }

  int fastest_free_core() const {
    int best = -1;
    for (std::size_t i = 0; i < core_speed_.size(); ++i) {
      if (core_free_[i] && (best < 0 || core_speed_[i] > core_speed_[best])) best = static_cast<int>(i);
    }
    return best;
  }

  void dispatch(double now) {
    now_ = now;
    std::uint64_t instant_firings = 0;
    bool changed = true;
    while (changed) {
      changed = false;
      for (int p : order_) {
        auto& proc = procs_[p];
        if (proc.instant) {
          while (ready(proc)) {
            take_inputs(p);
            --proc.running;
            emit_outputs(p);
            changed = true;
            if (++instant_firings > 100'000'000) {
              throw std::logic_error("simulation made no progress in time");
            }
          }
        } else if (proc.hardware) {
          while (ready(proc)) {
            take_inputs(p);
            const double span = jittered(proc.service);
            proc.busy += window_overlap(now_, now_ + span);
            schedule(now_ + span, EventKind::firing_done, p, 0);
            changed = true;
          }
        } else if (!proc.queued && ready(proc)) {
          proc.queued = true;
          cpu_queue_.push_back(p);
        }
      }
      for (int core = fastest_free_core(); core >= 0 && !cpu_queue_.empty();
           core = fastest_free_core()) {
        const int p = cpu_queue_.front();
        cpu_queue_.pop_front();
        auto& proc = procs_[p];
        proc.queued = false;
        core_free_[core] = false;
        take_inputs(p);
        const double span = jittered(proc.service) / core_speed_[core];
        cpu_work_ += window_overlap(now_, now_ + span) * core_speed_[core];
        proc.busy += window_overlap(now_, now_ + span);
        schedule(now_ + span, EventKind::firing_done, p, core);
        changed = true;
      }
    }
  }

  /// Follows "waits for" edges from the sink until a process repeats.
  std::string describe_deadlock() const {
    std::vector<int> path;
    std::vector<std::string> reasons;
    std::vector<int> seen(procs_.size(), -1);
    int p = sink_;
    while (p >= 0 && seen[p] < 0) {
      seen[p] = static_cast<int>(path.size());
      path.push_back(p);
      int next = -1;
      std::string reason;
      for (int c : procs_[p].inputs) {
        if (chans_[c].available < chans_[c].cons) {
          next = chans_[c].producer;
          reason = "needs tokens on " + chans_[c].id;
          break;
        }
      }
      if (next < 0) {
        for (int c : procs_[p].outputs) {
          if (chans_[c].occupancy + chans_[c].prod > config_.buffer_tokens) {
            next = chans_[c].consumer;
            reason = "needs space on " + chans_[c].id;
            break;
          }
        }
      }
      reasons.push_back(reason);
      p = next;
    }
    std::ostringstream os;
    os << "deadlock at t=" << now_ << ": ";
    const std::size_t begin = p >= 0 ? static_cast<std::size_t>(seen[p]) : 0;
    for (std::size_t i = begin; i < path.size(); ++i) {
      os << procs_[path[i]].id;
      if (!reasons[i].empty()) os << " (" << reasons[i] << ")";
      os << " -> ";
    }
    os << (p >= 0 ? procs_[p].id : std::string("?"));
    os << "; buffer_tokens " << config_.buffer_tokens
       << " may be too small for the channel rates";
    return os.str();
  }

  SimReport build_report() {
    now_ = config_.duration;
    const double window = config_.duration - warmup_;
    report_.window = window;
    report_.measured_throughput = static_cast<double>(report_.sink_firings) / window / q_sink_;

    auto fraction = [&](double busy, double capacity) {
      return capacity > 0 ? std::clamp(busy / capacity, 0.0, 1.0) : 0.0;
    };
    report_.utilization.push_back({"cpu", fraction(cpu_work_, cpu_cores_ * window), false});
    if (pcie_rate_) report_.utilization.push_back({"pcie", fraction(pcie_time_, window), false});
    for (const auto& p : procs_) {
      if (p.hardware) {
        report_.utilization.push_back({"hw:" + p.id, fraction(p.busy, p.servers * window), false});
      }
    }
    for (auto& ch : chans_) {
      if (ch.limiter_rate) {
        report_.utilization.push_back({"channel:" + ch.id, fraction(ch.limiter_time, window), false});
      }
    }
    for (auto& ch : chans_) {
      track(ch, 0, 0);
      report_.channels.push_back(
          {ch.id, ch.area / window, ch.produced, ch.consumed, ch.produced - ch.consumed});
    }
    return std::move(report_);
  }

  const ThroughputModel& model_;
  const SimConfig& config_;
  double warmup_;
  std::mt19937_64 rng_;
  std::vector<Proc> procs_;
  std::vector<Chan> chans_;
  std::vector<int> order_;
  std::vector<double> core_speed_;
  std::vector<bool> core_free_;
  double cpu_cores_ = 0;
  std::deque<int> cpu_queue_;
  std::optional<double> pcie_rate_;
  std::deque<Transfer> pcie_queue_;
  bool pcie_busy_ = false;
  double pcie_time_ = 0;
  double cpu_work_ = 0;
  int sink_ = 0;
  double q_sink_ = 1;
  double now_ = 0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  SimReport report_;
};

void check_config(const ProblemSpec& problem, const SimConfig& config) {
  if (!std::isfinite(config.duration) || config.duration <= 0) {
    throw SimulationConfigError("duration must be a positive number of seconds");
  }
  const double warmup = config.effective_warmup();
  if (!std::isfinite(warmup) || warmup < 0 || warmup >= config.duration) {
    throw SimulationConfigError("warmup must satisfy 0 <= warmup < duration");
  }
  if (!(config.jitter >= 0 && config.jitter < 1)) {
    throw SimulationConfigError("jitter must be in [0, 1)");
  }
  for (const auto& ch : problem.channels) {
    const auto needed = std::max(ch.prod_rate, ch.cons_rate);
    if (config.buffer_tokens < needed) {
      throw SimulationConfigError("buffer_tokens " + std::to_string(config.buffer_tokens) +
                                  " is below the rate " + std::to_string(needed) +
                                  " of channel \"" + ch.id + "\"");
    }
  }
}

std::string format_time(double t) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.9f", t);
  return buffer;
}

}  // namespace

SimReport simulate(const ProblemSpec& problem, const Assignment& assignment,
                   const SimConfig& config) {
  const ThroughputModel model(problem);
  const auto replicas = model.resolve(assignment);
  check_config(problem, config);
  const auto evaluation = evaluate(model, replicas);
  if (!evaluation.feasible) {
    std::string kinds;
    for (const auto& o : evaluation.overfull) kinds += (kinds.empty() ? "" : ", ") + o.kind;
    throw Infeasible("infeasible assignment: FPGA resources overfull (" + kinds + ")");
  }
  Simulator sim(model, replicas, config);
  return sim.run();
}

Comparison compare(const Evaluation& evaluation, const SimReport& report, double threshold) {
  if (!evaluation.throughput_lambda || *evaluation.throughput_lambda <= 0) {
    throw InputError("cannot compare: predicted lambda is absent or zero");
  }
  Comparison c;
  c.predicted = *evaluation.throughput_lambda;
  c.measured = report.measured_throughput;
  c.relative_error = std::abs(c.measured - c.predicted) / c.predicted;
  c.threshold = threshold;
  c.pass = c.relative_error <= threshold;
  return c;
}

nlohmann::ordered_json report_to_json(const SimReport& report) {
  using nlohmann::ordered_json;
  ordered_json out;
  out["measured_throughput"] = report.measured_throughput;
  out["sink_firings"] = report.sink_firings;
  out["window"] = report.window;
  ordered_json use = ordered_json::object();
  for (const auto& u : report.utilization) use[u.budget] = u.fraction;
  out["utilization"] = std::move(use);
  ordered_json channels = ordered_json::array();
  for (const auto& c : report.channels) {
    channels.push_back({{"channel", c.channel},
                        {"mean_tokens", c.mean_tokens},
                        {"produced", c.produced},
                        {"consumed", c.consumed},
                        {"final_tokens", c.final_tokens}});
  }
  out["channels"] = std::move(channels);
  out["event_count"] = report.event_count;
  return out;
}

nlohmann::ordered_json comparison_to_json(const Comparison& c) {
  return {{"predicted", c.predicted},
          {"measured", c.measured},
          {"relative_error", c.relative_error},
          {"threshold", c.threshold},
          {"verdict", c.pass ? "pass" : "fail"}};
}

std::string trace_to_csv(const std::vector<TraceEvent>& trace) {
  std::string out = "time,event_kind,entity_id,detail\n";
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char ch : s) {
      if (ch == '"') quoted += '"';
      quoted += ch;
    }
    return quoted + "\"";
  };
  for (const auto& e : trace) {
    out += format_time(e.time) + "," + field(e.kind) + "," + field(e.entity) + "," + field(e.detail) + "\n";
  }
  return out;
}

}  // namespace streampart
