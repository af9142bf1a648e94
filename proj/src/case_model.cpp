#include "critbus/case_model.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

#include "critbus/text_util.h"

namespace critbus {

std::string_view to_string(BusKind kind) {
  switch (kind) {
    case BusKind::slack:
      return "slack";
    case BusKind::generator:
      return "generator";
    case BusKind::load:
      return "load";
  }
  return "load";
}

Case::Case(double base_mva, std::vector<Bus> buses, std::vector<Branch> branches)
    : base_mva_(base_mva), buses_(std::move(buses)), branches_(std::move(branches)) {
  using K = CaseError::Kind;
  if (!(base_mva_ > 0.0) || !std::isfinite(base_mva_)) {
    throw CaseError(K::bad_value, "BASE_MVA must be a positive finite number");
  }

  std::set<int> ids;
  std::size_t slack_count = 0;
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    const auto &bus = buses_[i];
    if (!ids.insert(bus.id).second) {
      throw CaseError(K::duplicate_bus, "duplicate bus id " + std::to_string(bus.id));
    }
    for (double v : {bus.v_setpoint, bus.p_gen, bus.q_gen, bus.p_load, bus.q_load}) {
      if (!std::isfinite(v)) throw CaseError(K::bad_value, "bus " + std::to_string(bus.id) + ": non-finite value");
    }
    if (bus.kind != BusKind::load && !(bus.v_setpoint > 0.0)) {
      throw CaseError(K::bad_value, "bus " + std::to_string(bus.id) + ": voltage setpoint must be positive");
    }
    if (bus.kind == BusKind::slack) {
      ++slack_count;
      slack_index_ = i;
    }
  }
  if (slack_count == 0) throw CaseError(K::missing_slack, "case has no slack bus");
  if (slack_count > 1) throw CaseError(K::multiple_slack, "multiple slack buses");

  std::set<std::string> branch_ids;
  for (const auto &br : branches_) {
    if (!branch_ids.insert(br.id).second) {
      throw CaseError(K::duplicate_branch, "duplicate branch id " + br.id);
    }
    if (br.from_bus == br.to_bus) {
      throw CaseError(K::self_loop, "branch " + br.id + " connects bus " + std::to_string(br.from_bus) + " to itself");
    }
    for (int end : {br.from_bus, br.to_bus}) {
      if (!ids.contains(end)) {
        throw CaseError(K::unknown_bus, "branch " + br.id + " references unknown bus " + std::to_string(end));
      }
    }
    for (double v : {br.r, br.x, br.b_half}) {
      if (!std::isfinite(v)) throw CaseError(K::bad_value, "branch " + br.id + ": non-finite value");
    }
    if (br.r == 0.0 && br.x == 0.0) {
      throw CaseError(K::zero_impedance, "branch " + br.id + " has zero series impedance");
    }
  }
}

std::size_t Case::bus_index(int bus_id) const {
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    if (buses_[i].id == bus_id) return i;
  }
  throw CaseError(CaseError::Kind::unknown_bus, "unknown bus " + std::to_string(bus_id));
}

bool Case::has_bus(int bus_id) const {
  return std::any_of(buses_.begin(), buses_.end(), [&](const Bus &b) { return b.id == bus_id; });
}

std::size_t Case::branch_index(const std::string &branch_id) const {
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    if (branches_[i].id == branch_id) return i;
  }
  throw CaseError(CaseError::Kind::unknown_outage, "unknown branch " + branch_id);
}

const Branch *Case::branch_between(int bus_a, int bus_b) const {
  for (const auto &br : branches_) {
    if ((br.from_bus == bus_a && br.to_bus == bus_b) || (br.from_bus == bus_b && br.to_bus == bus_a)) return &br;
  }
  return nullptr;
}

std::vector<int> Case::load_bus_ids() const {
  std::vector<int> ids;
  for (const auto &b : buses_) {
    if (b.kind == BusKind::load) ids.push_back(b.id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void Case::check_outages(const OutageSet &outages) const {
  for (const auto &id : outages) branch_index(id);
}

namespace {

enum class Section { none, bus, branch };

[[noreturn]] void parse_fail(CaseError::Kind kind, std::size_t line_no, const std::string &msg) {
  throw CaseError(kind, "line " + std::to_string(line_no) + ": " + msg);
}

double number_field(std::string_view tok, std::size_t line_no, const char *field) {
  auto v = text::parse_double(tok);
  if (!v) parse_fail(CaseError::Kind::malformed, line_no, std::string("bad ") + field + " '" + std::string(tok) + "'");
  return *v;
}

BusKind parse_kind(std::string_view tok, std::size_t line_no) {
  if (tok == "slack") return BusKind::slack;
  if (tok == "generator" || tok == "gen" || tok == "pv") return BusKind::generator;
  if (tok == "load" || tok == "pq") return BusKind::load;
  parse_fail(CaseError::Kind::malformed, line_no, "unknown bus kind '" + std::string(tok) + "'");
}

}  // namespace

Case parse_case(std::string_view text) {
  using K = CaseError::Kind;
  std::optional<double> base_mva;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  Section section = Section::none;

  auto lines = text::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    auto tok = text::tokenize(lines[n]);
    if (tok.empty()) continue;

    if (tok[0] == "BASE_MVA") {
      if (tok.size() != 2) parse_fail(K::malformed, line_no, "BASE_MVA expects one value");
      if (base_mva) parse_fail(K::malformed, line_no, "BASE_MVA given twice");
      base_mva = number_field(tok[1], line_no, "BASE_MVA");
      section = Section::none;
      continue;
    }
    if (tok[0] == "BUS" && tok.size() == 1) {
      section = Section::bus;
      continue;
    }
    if (tok[0] == "BRANCH" && tok.size() == 1) {
      section = Section::branch;
      continue;
    }

    switch (section) {
      case Section::none:
        parse_fail(K::malformed, line_no, "record outside BUS/BRANCH section");
      case Section::bus: {
        if (tok.size() != 7) parse_fail(K::malformed, line_no, "BUS record needs 7 fields, got " + std::to_string(tok.size()));
        auto id = text::parse_int(tok[0]);
        if (!id || *id <= 0) parse_fail(K::malformed, line_no, "bad bus id '" + std::string(tok[0]) + "'");
        Bus bus;
        bus.id = *id;
        bus.kind = parse_kind(tok[1], line_no);
        bus.v_setpoint = number_field(tok[2], line_no, "v_setpoint");
        bus.p_gen = number_field(tok[3], line_no, "p_gen");
        bus.q_gen = number_field(tok[4], line_no, "q_gen");
        bus.p_load = number_field(tok[5], line_no, "p_load");
        bus.q_load = number_field(tok[6], line_no, "q_load");
        for (const auto &prev : buses) {
          if (prev.id == bus.id) parse_fail(K::duplicate_bus, line_no, "duplicate bus id " + std::to_string(bus.id));
        }
        if (bus.kind == BusKind::slack) {
          for (const auto &prev : buses) {
            if (prev.kind == BusKind::slack) parse_fail(K::multiple_slack, line_no, "multiple slack buses");
          }
        }
        buses.push_back(bus);
        break;
      }
      case Section::branch: {
        if (tok.size() != 6) {
          parse_fail(K::malformed, line_no, "BRANCH record needs 6 fields, got " + std::to_string(tok.size()));
        }
        Branch br;
        br.id = std::string(tok[0]);
        auto from = text::parse_int(tok[1]);
        auto to = text::parse_int(tok[2]);
        if (!from || !to) parse_fail(K::malformed, line_no, "bad endpoint in branch " + br.id);
        br.from_bus = *from;
        br.to_bus = *to;
        br.r = number_field(tok[3], line_no, "r");
        br.x = number_field(tok[4], line_no, "x");
        br.b_half = number_field(tok[5], line_no, "b_half");
        branches.push_back(std::move(br));
        break;
      }
    }
  }
  if (!base_mva) throw CaseError(K::malformed, "missing BASE_MVA");
  return Case(*base_mva, std::move(buses), std::move(branches));
}

Case load_case_file(const std::string &path) {
  std::string text;
  try {
    text = text::read_file(path);
  } catch (const std::runtime_error &e) {
    throw CaseError(CaseError::Kind::malformed, e.what());
  }
  return parse_case(text);
}

std::string serialize_case(const Case &c) {
  using text::format_double;
  std::ostringstream out;
  out << "BASE_MVA " << format_double(c.base_mva()) << "\n\nBUS\n";
  out << "# id kind v_setpoint p_gen q_gen p_load q_load\n";
  for (const auto &b : c.buses()) {
    out << b.id << ' ' << to_string(b.kind) << ' ' << format_double(b.v_setpoint) << ' ' << format_double(b.p_gen) << ' '
        << format_double(b.q_gen) << ' ' << format_double(b.p_load) << ' ' << format_double(b.q_load) << '\n';
  }
  out << "\nBRANCH\n# id from to r x b_half\n";
  for (const auto &br : c.branches()) {
    out << br.id << ' ' << br.from_bus << ' ' << br.to_bus << ' ' << format_double(br.r) << ' ' << format_double(br.x)
        << ' ' << format_double(br.b_half) << '\n';
  }
  return out.str();
}

AdmittanceMatrix build_ybus(const Case &c, const OutageSet &outages) {
  c.check_outages(outages);
  const auto n = static_cast<Eigen::Index>(c.bus_count());
  AdmittanceMatrix y = AdmittanceMatrix::Zero(n, n);
  for (const auto &br : c.branches()) {
    if (!c.in_service(br, outages)) continue;
    const auto i = static_cast<Eigen::Index>(c.bus_index(br.from_bus));
    const auto j = static_cast<Eigen::Index>(c.bus_index(br.to_bus));
    const std::complex<double> ys = br.series_admittance();
    const std::complex<double> charging(0.0, br.b_half);
    y(i, i) += ys + charging;
    y(j, j) += ys + charging;
    y(i, j) -= ys;
    y(j, i) -= ys;
  }
  return y;
}

Connectivity check_connectivity(const Case &c, const OutageSet &outages) {
  c.check_outages(outages);
  const std::size_t n = c.bus_count();
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (const auto &br : c.branches()) {
    if (!c.in_service(br, outages)) continue;
    const auto i = c.bus_index(br.from_bus);
    const auto j = c.bus_index(br.to_bus);
    adjacency[i].push_back(j);
    adjacency[j].push_back(i);
  }

  std::vector<int> label(n, -1);
  Connectivity result;
  auto flood = [&](std::size_t start) {
    const int comp = static_cast<int>(result.components.size());
    result.components.emplace_back();
    std::queue<std::size_t> frontier;
    frontier.push(start);
    label[start] = comp;
    while (!frontier.empty()) {
      const auto at = frontier.front();
      frontier.pop();
      result.components.back().push_back(c.buses()[at].id);
      for (auto next : adjacency[at]) {
        if (label[next] < 0) {
          label[next] = comp;
          frontier.push(next);
        }
      }
    }
    std::sort(result.components.back().begin(), result.components.back().end());
  };

  flood(c.slack_index());
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] < 0) flood(i);
  }
  result.connected = result.components.size() == 1;
  return result;
}

}  // namespace critbus
