#include "streampart/milp.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

#include "streampart/error.hpp"
#include "streampart/throughput_model.hpp"

namespace streampart {

namespace {

constexpr std::size_t kTermsPerLine = 6;

std::string num(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

/// Linear expression with a constant part; terms keep insertion order and
/// repeated variables are merged.
class LinearExpr {
 public:
  LinearExpr& add(double coefficient, const std::string& variable) {
    for (auto& t : terms_) {
      if (t.variable == variable) {
        t.coefficient += coefficient;
        return *this;
      }
    }
    terms_.push_back({coefficient, variable});
    return *this;
  }

  LinearExpr& add(double coefficient, const LinearExpr& other) {
    for (const auto& t : other.terms_) add(coefficient * t.coefficient, t.variable);
    constant_ += coefficient * other.constant_;
    return *this;
  }

  LinearExpr& add_constant(double value) {
    constant_ += value;
    return *this;
  }

  double constant() const { return constant_; }

  std::vector<LpTerm> nonzero_terms() const {
    std::vector<LpTerm> out;
    for (const auto& t : terms_) {
      if (t.coefficient != 0) out.push_back(t);
    }
    return out;
  }

 private:
  std::vector<LpTerm> terms_;
  double constant_ = 0;
};

class LpWriter {
 public:
  void comment(const std::string& text) { header_ << "\\ " << text << "\n"; }

  /// Adds `lhs sense rhs`, moving the constant of lhs to the right side.
  void row(const std::string& name, const LinearExpr& lhs, const std::string& sense, double rhs) {
    rows_ << " " << name << ":";
    write_terms(rows_, lhs.nonzero_terms());
    rows_ << " " << sense << " " << num(rhs - lhs.constant()) << "\n";
  }

  void bound(const std::string& text) { bounds_ << " " << text << "\n"; }
  void binary(const std::string& variable) { binaries_.push_back(variable); }

  std::string str(const std::string& objective) const {
    std::ostringstream os;
    os << header_.str();
    os << "MAXIMIZE\n obj: " << objective << "\n";
    os << "SUBJECT TO\n" << rows_.str();
    os << "BOUNDS\n" << bounds_.str();
    if (!binaries_.empty()) {
      os << "BINARIES\n";
      for (std::size_t i = 0; i < binaries_.size(); i += 8) {
        os << " ";
        for (std::size_t j = i; j < std::min(binaries_.size(), i + 8); ++j) {
          os << (j > i ? " " : "") << binaries_[j];
        }
        os << "\n";
      }
    }
    os << "END\n";
    return os.str();
  }

 private:
  static void write_terms(std::ostream& os, const std::vector<LpTerm>& terms) {
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (i > 0 && i % kTermsPerLine == 0) os << "\n   ";
      const double c = terms[i].coefficient;
      os << " " << (c < 0 ? "- " : (i > 0 ? "+ " : "")) << num(std::abs(c)) << " "
         << terms[i].variable;
    }
  }

  std::ostringstream header_;
  std::ostringstream rows_;
  std::ostringstream bounds_;
  std::vector<std::string> binaries_;
};

std::string proc_name(int p) { return "p" + std::to_string(p); }
std::string chan_name(int c) { return "c" + std::to_string(c); }
std::string y_name(int p, int r) {
  return "y_" + proc_name(p) + (r == 0 ? "_sw" : "_hw" + std::to_string(r));
}

}  // namespace

std::string export_milp(const ProblemSpec& problem) {
  const ThroughputModel model(problem);
  const int n = model.process_count();
  const int m = model.channel_count();
  const auto& exact = model.exact();

  const Replicas open(n, kUndecided);
  if (!model.fits(open)) {
    throw Infeasible("infeasible: pinned hardware processes do not fit the FPGA");
  }
  const auto bound = model.exact_lambda(open);
  if (!bound) throw UnboundedThroughput();
  // Smallest integer >= the admissible bound on the empty assignment.
  const auto big_m_int = boost::multiprecision::numerator(*bound) / boost::multiprecision::denominator(*bound) +
                         (boost::multiprecision::denominator(*bound) == 1 ? 0 : 1);
  const double big_m = big_m_int.convert_to<double>();

  LpWriter lp;
  lp.comment("streampart partitioning model (format " + std::string(STREAMPART_VERSION) + ")");
  lp.comment("maximize the iteration rate lambda; y_pI_sw / y_pI_hwR select SW or HW(R) for process I");
  lp.comment("big-M = " + num(big_m) + " = ceil(admissible lambda bound of the empty assignment)");
  lp.comment("load rows use M_u = (q/sw) * M and M_w = demand * M");
  for (int p = 0; p < n; ++p) {
    lp.comment(proc_name(p) + " = process " + problem.processes[p].id + " (q = " +
               std::to_string(model.repetition()[p]) + ")");
  }
  for (int c = 0; c < m; ++c) lp.comment(chan_name(c) + " = channel " + problem.channels[c].id);
  const auto& kinds = problem.platform.resource_kinds;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    lp.comment("fpga_k" + std::to_string(k) + " = resource " + kinds[k]);
  }

  // HW indicator h_p as an expression: constant for pinned processes.
  std::vector<LinearExpr> hw_indicator(n);
  std::vector<LinearExpr> hw_replicas(n);
  for (int p = 0; p < n; ++p) {
    if (!model.allows_hw(p)) continue;
    if (!model.allows_sw(p)) {
      hw_indicator[p].add_constant(1);
    } else {
      for (int r = 1; r <= model.r_max(p); ++r) hw_indicator[p].add(1, y_name(p, r));
    }
    for (int r = 1; r <= model.r_max(p); ++r) hw_replicas[p].add(r, y_name(p, r));
  }

  // Exactly one option per process.
  for (int p = 0; p < n; ++p) {
    LinearExpr e;
    if (model.allows_sw(p)) e.add(1, y_name(p, 0));
    if (model.allows_hw(p)) {
      for (int r = 1; r <= model.r_max(p); ++r) e.add(1, y_name(p, r));
    }
    lp.row("assign_" + proc_name(p), e, "=", 1);
  }

  // Rate caps, relaxed by big-M when the option is not selected.
  for (int p = 0; p < n; ++p) {
    if (model.allows_sw(p) && exact.sw_cap[p]) {
      LinearExpr e;
      e.add(1, "lambda").add(big_m, y_name(p, 0));
      lp.row("rate_" + proc_name(p) + "_sw", e, "<=", to_double(*exact.sw_cap[p]) + big_m);
    }
    if (model.allows_hw(p)) {
      for (int r = 1; r <= model.r_max(p); ++r) {
        LinearExpr e;
        e.add(1, "lambda").add(big_m, y_name(p, r));
        lp.row("rate_" + proc_name(p) + "_hw" + std::to_string(r), e, "<=",
               to_double(exact.hw_cap[p][r - 1]) + big_m);
      }
    }
  }

  // FPGA knapsack per resource kind.
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    LinearExpr e;
    for (int p = 0; p < n; ++p) {
      if (!model.allows_hw(p)) continue;
      const auto& hw = *problem.processes[p].hw_profile;
      for (int r = 1; r <= model.r_max(p); ++r) {
        const auto amount = hw.resource_at(kinds[k], r);
        if (amount != 0) e.add(static_cast<double>(amount), y_name(p, r));
      }
    }
    if (e.nonzero_terms().empty()) continue;
    lp.row("fpga_k" + std::to_string(k), e, "<=", static_cast<double>(model.capacity()[k]));
  }

  // CPU aggregate via per-process load variables.
  LinearExpr cpu;
  for (int p = 0; p < n; ++p) {
    if (!model.allows_sw(p) || !exact.sw_cap[p]) continue;
    const double load = to_double(exact.sw_load[p]);
    const double big = load * big_m;
    const std::string u = "u_" + proc_name(p);
    LinearExpr e;
    e.add(1, u).add(-load, "lambda").add(-big, y_name(p, 0));
    lp.row("cpuload_" + proc_name(p), e, ">=", -big);
    cpu.add(1, u);
  }
  if (!cpu.nonzero_terms().empty()) lp.row("cpu", cpu, "<=", to_double(exact.cpu_cores));

  // Channel bandwidth; on-chip channels widen with min(R_u, R_v).
  for (int c = 0; c < m; ++c) {
    if (!exact.channel_unit_cap[c]) continue;
    const int u = model.producer(c);
    const int v = model.consumer(c);
    const double unit = to_double(*exact.channel_unit_cap[c]);
    if (problem.channels[c].scale_with_replication && model.allows_hw(u) && model.allows_hw(v)) {
      const std::string s = "s_" + chan_name(c);
      const int r_cap = std::min(model.r_max(u), model.r_max(v));
      for (auto [end, tag] : {std::pair{u, "u"}, std::pair{v, "v"}}) {
        // s <= 1 + (Rc - 1) h
        LinearExpr flag;
        flag.add(1, s).add(-(r_cap - 1), hw_indicator[end]);
        lp.row("scale_" + chan_name(c) + "_" + tag, flag, "<=", 1);
      }
      for (auto [end, tag] : {std::pair{u, "ru"}, std::pair{v, "rv"}}) {
        // s <= sum r*y + Rc (1 - h)
        LinearExpr cap;
        cap.add(1, s).add(-1, hw_replicas[end]).add(r_cap, hw_indicator[end]);
        lp.row("scale_" + chan_name(c) + "_" + tag, cap, "<=", r_cap);
      }
      LinearExpr e;
      e.add(1, "lambda").add(-unit, s);
      lp.row("bw_" + chan_name(c), e, "<=", 0);
    } else {
      LinearExpr e;
      e.add(1, "lambda");
      lp.row("bw_" + chan_name(c), e, "<=", unit);
    }
  }

  // PCIe aggregate over channels that may cross the SW/HW boundary.
  std::vector<std::string> and_binaries;
  if (exact.pcie_bandwidth) {
    LinearExpr pcie;
    for (int c = 0; c < m; ++c) {
      const int u = model.producer(c);
      const int v = model.consumer(c);
      const bool may_cross = (model.allows_sw(u) && model.allows_hw(v)) ||
                             (model.allows_hw(u) && model.allows_sw(v));
      if (!may_cross) continue;
      const bool u_free = model.allows_sw(u) && model.allows_hw(u);
      const bool v_free = model.allows_sw(v) && model.allows_hw(v);

      // crossing = h_u + h_v - 2 h_u h_v
      LinearExpr crossing;
      crossing.add(1, hw_indicator[u]).add(1, hw_indicator[v]);
      if (u_free && v_free) {
        const std::string a = "a_" + chan_name(c);
        LinearExpr le_u, le_v, ge;
        le_u.add(1, a).add(-1, hw_indicator[u]);
        le_v.add(1, a).add(-1, hw_indicator[v]);
        ge.add(1, a).add(-1, hw_indicator[u]).add(-1, hw_indicator[v]);
        lp.row("and_" + chan_name(c) + "_u", le_u, "<=", 0);
        lp.row("and_" + chan_name(c) + "_v", le_v, "<=", 0);
        lp.row("and_" + chan_name(c) + "_uv", ge, ">=", -1);
        crossing.add(-2, a);
        and_binaries.push_back(a);
      } else {
        // one endpoint is pinned, so its indicator is a constant
        const LinearExpr& fixed = u_free ? hw_indicator[v] : hw_indicator[u];
        const LinearExpr& other = u_free ? hw_indicator[u] : hw_indicator[v];
        crossing.add(-2 * fixed.constant(), other);
      }

      const double demand = to_double(exact.channel_demand[c]);
      const double big = demand * big_m;
      const std::string w = "w_" + chan_name(c);
      LinearExpr e;
      e.add(1, w).add(-demand, "lambda").add(-big, crossing);
      lp.row("pcieload_" + chan_name(c), e, ">=", -big);
      pcie.add(1, w);
    }
    if (!pcie.nonzero_terms().empty()) {
      lp.row("pcie", pcie, "<=", to_double(*exact.pcie_bandwidth));
    }
  }

  lp.bound("0 <= lambda <= " + num(big_m));
  for (int p = 0; p < n; ++p) {
    if (model.allows_sw(p)) lp.binary(y_name(p, 0));
    if (model.allows_hw(p)) {
      for (int r = 1; r <= model.r_max(p); ++r) lp.binary(y_name(p, r));
    }
  }
  for (const auto& a : and_binaries) lp.binary(a);
  return lp.str("lambda");
}

// ---------------------------------------------------------------------------
// Structural checker

namespace {

enum class Section { none, objective, constraints, bounds, binaries, end };

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::optional<Section> section_keyword(const std::string& line) {
  const std::string u = upper(trim(line));
  if (u == "MAXIMIZE" || u == "MAXIMISE" || u == "MAX" || u == "MINIMIZE" || u == "MINIMISE" ||
      u == "MIN") {
    return Section::objective;
  }
  if (u == "SUBJECT TO" || u == "SUCH THAT" || u == "ST" || u == "S.T.") return Section::constraints;
  if (u == "BOUNDS" || u == "BOUND") return Section::bounds;
  if (u == "BINARIES" || u == "BINARY" || u == "BIN") return Section::binaries;
  if (u == "END") return Section::end;
  return std::nullopt;
}

bool valid_name(std::string_view name) {
  static const std::string extra = "!\"#$%&()/,.;?@_`'{}|~";
  if (name.empty() || name.size() > 255) return false;
  if (std::isdigit(static_cast<unsigned char>(name[0])) || name[0] == '.') return false;
  if (upper(name)[0] == 'E' && name.size() > 1 && std::isdigit(static_cast<unsigned char>(name[1]))) {
    return false;  // would read as an exponent
  }
  for (char ch : name) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && extra.find(ch) == std::string::npos) {
      return false;
    }
  }
  return true;
}

std::vector<std::string> tokens(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    if (text[i] == '<' || text[i] == '>' || text[i] == '=') {
      std::string op(1, text[i]);
      if (i + 1 < text.size() && text[i + 1] == '=') {
        op += '=';
        ++i;
      }
      if (op == "=<") op = "<=";
      if (op == "=>") op = ">=";
      if (op == "<") op = "<=";
      if (op == ">") op = ">=";
      out.push_back(op);
      ++i;
      continue;
    }
    if (text[i] == '+' || text[i] == '-') {
      out.emplace_back(1, text[i]);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '<' &&
           text[j] != '>' && text[j] != '=' &&
           !((text[j] == '+' || text[j] == '-') && j > i &&
             !(std::toupper(static_cast<unsigned char>(text[j - 1])) == 'E' &&
               std::isdigit(static_cast<unsigned char>(text[i]))))) {
      ++j;
    }
    out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<double> parse_number(const std::string& token) {
  if (token.empty()) return std::nullopt;
  const char c = token[0];
  if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.') {
    const std::string u = upper(token);
    if (u == "INF" || u == "INFINITY") return std::numeric_limits<double>::infinity();
    return std::nullopt;
  }
  std::size_t used = 0;
  try {
    double v = std::stod(token, &used);
    if (used != token.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

[[noreturn]] void lp_error(std::size_t line, const std::string& message) {
  throw ParseError("LP: " + message, line, 1);
}

/// Parses "[+|-] [coef] var ..." from tokens[begin, end).
std::vector<LpTerm> parse_terms(const std::vector<std::string>& toks, std::size_t begin,
                                std::size_t end, std::size_t line) {
  std::vector<LpTerm> out;
  std::size_t i = begin;
  while (i < end) {
    double sign = 1;
    bool had_sign = false;
    while (i < end && (toks[i] == "+" || toks[i] == "-")) {
      if (toks[i] == "-") sign = -sign;
      had_sign = true;
      ++i;
    }
    if (i >= end) lp_error(line, "dangling sign");
    if (!out.empty() && !had_sign) lp_error(line, "missing operator before \"" + toks[i] + "\"");
    double coefficient = 1;
    if (auto v = parse_number(toks[i])) {
      coefficient = *v;
      ++i;
      if (i >= end) lp_error(line, "coefficient without variable");
    }
    if (!valid_name(toks[i])) lp_error(line, "invalid variable name \"" + toks[i] + "\"");
    out.push_back({sign * coefficient, toks[i]});
    ++i;
  }
  return out;
}

}  // namespace

LpModel check_lp(std::string_view text) {
  LpModel model;
  std::set<std::string> known;
  auto note = [&](const std::string& v) {
    if (known.insert(v).second) model.variables.push_back(v);
  };

  Section section = Section::none;
  int rank = 0;  // enforces section order
  std::string pending;
  std::size_t pending_line = 0;
  std::set<std::string> row_names;
  std::size_t line_no = 0;

  auto flush_row = [&]() {
    if (trim(pending).empty()) return;
    const auto colon = pending.find(':');
    if (colon == std::string::npos) lp_error(pending_line, "constraint without a name");
    LpRow row;
    row.name = trim(pending.substr(0, colon));
    if (!valid_name(row.name)) lp_error(pending_line, "invalid row name \"" + row.name + "\"");
    if (!row_names.insert(row.name).second) lp_error(pending_line, "duplicate row \"" + row.name + "\"");
    const auto toks = tokens(pending.substr(colon + 1));
    std::size_t op = toks.size();
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i] == "<=" || toks[i] == ">=" || toks[i] == "=") {
        op = i;
        break;
      }
    }
    if (op == toks.size()) lp_error(pending_line, "row \"" + row.name + "\" has no sense");
    row.terms = parse_terms(toks, 0, op, pending_line);
    if (row.terms.empty()) lp_error(pending_line, "row \"" + row.name + "\" has no terms");
    row.sense = toks[op];
    double sign = 1;
    std::size_t k = op + 1;
    if (k < toks.size() && (toks[k] == "-" || toks[k] == "+")) {
      sign = toks[k] == "-" ? -1 : 1;
      ++k;
    }
    if (k + 1 != toks.size()) lp_error(pending_line, "row \"" + row.name + "\": expected one constant");
    auto rhs = parse_number(toks[k]);
    if (!rhs) lp_error(pending_line, "row \"" + row.name + "\": bad right-hand side");
    row.rhs = sign * *rhs;
    for (const auto& t : row.terms) note(t.variable);
    model.rows.push_back(std::move(row));
    pending.clear();
  };

  std::istringstream in{std::string(text)};
  std::string raw;
  std::string objective_text;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto slash = raw.find('\\'); slash != std::string::npos) raw = raw.substr(0, slash);
    if (trim(raw).empty()) continue;

    if (auto kw = section_keyword(raw)) {
      if (section == Section::constraints) flush_row();
      const int next = static_cast<int>(*kw);
      if (next <= rank) lp_error(line_no, "section out of order");
      if (*kw == Section::objective) model.objective_sense = upper(trim(raw)).substr(0, 3) == "MAX" ? "MAXIMIZE" : "MINIMIZE";
      if (section == Section::objective) {
        auto toks = tokens(objective_text);
        std::size_t begin = 0;
        if (auto colon = objective_text.find(':'); colon != std::string::npos) {
          toks = tokens(objective_text.substr(colon + 1));
        }
        model.objective = parse_terms(toks, begin, toks.size(), line_no);
        for (const auto& t : model.objective) note(t.variable);
      }
      section = *kw;
      rank = next;
      continue;
    }

    switch (section) {
      case Section::none:
        lp_error(line_no, "content before the objective section");
      case Section::objective:
        objective_text += " " + raw;
        break;
      case Section::constraints: {
        if (pending.empty()) pending_line = line_no;
        pending += " " + raw;
        const auto toks = tokens(pending.substr(pending.find(':') == std::string::npos ? 0 : pending.find(':') + 1));
        const bool complete = std::any_of(toks.begin(), toks.end(), [](const std::string& t) {
          return t == "<=" || t == ">=" || t == "=";
        });
        if (complete) flush_row();
        break;
      }
      case Section::bounds: {
        const auto toks = tokens(raw);
        if (toks.size() == 5 && toks[1] == "<=" && toks[3] == "<=") {
          auto lo = parse_number(toks[0]);
          auto hi = parse_number(toks[4]);
          if (!lo || !hi || !valid_name(toks[2])) lp_error(line_no, "bad bound");
          model.bounds[toks[2]] = {*lo, *hi, true};
        } else if (toks.size() == 3 && valid_name(toks[0]) && (toks[1] == "<=" || toks[1] == ">=")) {
          auto v = parse_number(toks[2]);
          if (!v) lp_error(line_no, "bad bound");
          auto& b = model.bounds[toks[0]];
          if (toks[1] == "<=") {
            b.upper = *v;
            b.has_upper = true;
          } else {
            b.lower = *v;
          }
        } else if (toks.size() == 2 && upper(toks[1]) == "FREE" && valid_name(toks[0])) {
          model.bounds[toks[0]] = {-std::numeric_limits<double>::infinity(), 0, false};
        } else {
          lp_error(line_no, "bad bound");
        }
        break;
      }
      case Section::binaries: {
        std::istringstream names(raw);
        std::string name;
        while (names >> name) {
          if (!valid_name(name)) lp_error(line_no, "invalid binary name \"" + name + "\"");
          model.binaries.push_back(name);
        }
        break;
      }
      case Section::end:
        lp_error(line_no, "content after END");
    }
  }
  if (section != Section::end) lp_error(line_no, "missing END");
  if (!pending.empty()) lp_error(pending_line, "unterminated row");
  if (model.objective.empty()) lp_error(0, "empty objective");
  if (model.rows.empty()) lp_error(0, "no constraints");
  for (const auto& [name, b] : model.bounds) {
    if (!known.count(name)) lp_error(0, "bound on unused variable \"" + name + "\"");
  }
  std::set<std::string> seen_binaries;
  for (const auto& b : model.binaries) {
    if (!known.count(b)) lp_error(0, "binary \"" + b + "\" appears in no row");
    if (!seen_binaries.insert(b).second) lp_error(0, "binary \"" + b + "\" declared twice");
  }
  return model;
}

}  // namespace streampart
