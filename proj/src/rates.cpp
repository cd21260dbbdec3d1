#include "streampart/rates.hpp"

#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "streampart/error.hpp"

namespace streampart {

namespace {

using i128 = __int128;

constexpr i128 kMax = std::numeric_limits<std::int64_t>::max();

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

/// Positive fraction with 64-bit parts; arithmetic reports overflow.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Fraction make(i128 num, i128 den) {
    const i128 g = gcd128(num, den);
    num /= g;
    den /= g;
    if (num > kMax || den > kMax) {
      throw ArithmeticOverflow("repetition counts exceed 64-bit range");
    }
    return {static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
  }
};

}  // namespace

std::int64_t RepetitionVector::at(std::string_view id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return counts[i];
  }
  throw InputError("no repetition count for unknown process \"" + std::string(id) + "\"");
}

RepetitionVector repetition_vector(const ProblemSpec& problem) {
  const std::size_t n = problem.processes.size();
  RepetitionVector out;
  if (n == 0) return out;

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(problem.processes[i].id, i);

  struct Edge {
    std::size_t channel;
    std::size_t other;
    bool outgoing;
  };
  std::vector<std::vector<Edge>> adjacency(n);
  std::vector<std::pair<std::size_t, std::size_t>> ends;
  for (std::size_t c = 0; c < problem.channels.size(); ++c) {
    const auto& ch = problem.channels[c];
    auto u = index.find(ch.producer);
    auto v = index.find(ch.consumer);
    if (u == index.end() || v == index.end()) {
      throw InputError("channel \"" + ch.id + "\" names an unknown process");
    }
    if (ch.prod_rate <= 0 || ch.cons_rate <= 0) {
      throw InputError("channel \"" + ch.id + "\" must have positive rates");
    }
    adjacency[u->second].push_back({c, v->second, true});
    adjacency[v->second].push_back({c, u->second, false});
    ends.emplace_back(u->second, v->second);
  }

  // Propagate fractions along a BFS spanning tree.
  std::vector<std::optional<Fraction>> q(n);
  q[0] = Fraction{1, 1};
  std::deque<std::size_t> frontier{0};
  while (!frontier.empty()) {
    const std::size_t p = frontier.front();
    frontier.pop_front();
    for (const auto& e : adjacency[p]) {
      if (q[e.other]) continue;
      const auto& ch = problem.channels[e.channel];
      // q_u * prod = q_v * cons
      q[e.other] = e.outgoing
                       ? Fraction::make(i128(q[p]->num) * ch.prod_rate, i128(q[p]->den) * ch.cons_rate)
                       : Fraction::make(i128(q[p]->num) * ch.cons_rate, i128(q[p]->den) * ch.prod_rate);
      frontier.push_back(e.other);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!q[i]) {
      throw InputError("graph is not weakly connected: process \"" + problem.processes[i].id +
                       "\" is unreachable from \"" + problem.processes[0].id + "\"");
    }
  }

  // Common denominator, then reduce by the gcd.
  i128 lcm = 1;
  for (const auto& f : q) {
    lcm = lcm / gcd128(lcm, f->den) * f->den;
    if (lcm > kMax) throw ArithmeticOverflow("repetition counts exceed 64-bit range");
  }
  std::vector<i128> scaled(n);
  i128 g = 0;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = i128(q[i]->num) * (lcm / q[i]->den);
    if (scaled[i] > kMax) throw ArithmeticOverflow("repetition counts exceed 64-bit range");
    g = gcd128(g, scaled[i]);
  }

  out.ids.reserve(n);
  out.counts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.ids.push_back(problem.processes[i].id);
    out.counts.push_back(static_cast<std::int64_t>(scaled[i] / g));
  }

  for (std::size_t c = 0; c < problem.channels.size(); ++c) {
    const auto& ch = problem.channels[c];
    const auto [u, v] = ends[c];
    if (i128(out.counts[u]) * ch.prod_rate != i128(out.counts[v]) * ch.cons_rate) {
      throw InconsistentRates("inconsistent rates: channel \"" + ch.id + "\" (" + ch.producer + " -> " +
                                  ch.consumer + ", " + std::to_string(ch.prod_rate) + ":" +
                                  std::to_string(ch.cons_rate) +
                                  ") contradicts the balance implied by the other channels",
                              ch.id);
    }
  }
  return out;
}

}  // namespace streampart
