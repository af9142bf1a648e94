#include "critbus/stress.h"

#include <algorithm>
#include <cmath>

#include "critbus/indices.h"
#include "critbus/text_util.h"

namespace critbus {

Contingency base_contingency() { return Contingency{"base", {}}; }

Contingency parse_contingency(const Case &c, std::string_view label) {
  Contingency out;
  std::string canonical;
  std::size_t pos = 0;
  while (pos <= label.size()) {
    auto comma = label.find(',', pos);
    auto part = label.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    auto tok = text::tokenize(part);
    if (tok.size() != 1) throw CaseError(CaseError::Kind::malformed, "bad contingency '" + std::string(label) + "'");
    const auto pair = tok[0];
    const auto dash = pair.find('-');
    const Branch *br = nullptr;
    if (dash != std::string_view::npos) {
      auto a = text::parse_int(pair.substr(0, dash));
      auto b = text::parse_int(pair.substr(dash + 1));
      if (a && b) br = c.branch_between(*a, *b);
    }
    if (br == nullptr) {
      // fall back to a literal branch id
      for (const auto &candidate : c.branches()) {
        if (candidate.id == pair) br = &candidate;
      }
    }
    if (br == nullptr) {
      throw CaseError(CaseError::Kind::unknown_outage, "contingency '" + std::string(label) + "': no branch " +
                                                           std::string(pair));
    }
    if (!out.branches.insert(br->id).second) {
      throw CaseError(CaseError::Kind::malformed, "contingency '" + std::string(label) + "' repeats " + br->id);
    }
    if (!canonical.empty()) canonical += ',';
    canonical += br->id;
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  out.label = canonical;
  return out;
}

std::vector<Contingency> parse_contingency_list(const Case &c, std::string_view text) {
  std::vector<Contingency> list;
  for (auto line : text::split_lines(text)) {
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (text::tokenize(line).empty()) continue;
    // tolerate spaces after commas
    std::string compact;
    for (char ch : line) {
      if (ch != ' ' && ch != '\t' && ch != '\r') compact += ch;
    }
    list.push_back(parse_contingency(c, compact));
  }
  return list;
}

std::vector<Contingency> load_contingency_file(const Case &c, const std::string &path) {
  std::string body;
  try {
    body = text::read_file(path);
  } catch (const std::runtime_error &e) {
    throw CaseError(CaseError::Kind::malformed, e.what());
  }
  return parse_contingency_list(c, body);
}

LoadIncrement ramp_increment(const Case &c, int bus_id, double delta_q, const RampOptions &options) {
  LoadIncrement inc{0.0, delta_q};
  if (options.constant_power_factor) {
    const auto &bus = c.buses()[c.bus_index(bus_id)];
    if (bus.q_load != 0.0) inc.dp = delta_q * bus.p_load / bus.q_load;
  }
  return inc;
}

namespace {

SolveOutcome solve_at(const Case &c, const Contingency &contingency, int bus_id, double delta_q,
                      const RampOptions &options, const VoltageState *start) {
  const PowerFlowProblem problem(c, contingency.branches, {{bus_id, ramp_increment(c, bus_id, delta_q, options)}});
  PowerFlowOptions pf = options.powerflow;
  if (!options.warm_start) start = nullptr;
  return problem.solve(pf, start);
}

}  // namespace

CriticalLoadResult find_critical_load(const Case &c, const Contingency &contingency, int bus_id,
                                      const RampOptions &options) {
  using K = StressError::Kind;
  c.check_outages(contingency.branches);
  if (c.buses()[c.bus_index(bus_id)].kind != BusKind::load) {
    throw StressError(K::not_load_bus, "bus " + std::to_string(bus_id) + " is not a load bus");
  }
  if (!check_connectivity(c, contingency.branches).connected) {
    throw StressError(K::islanded, "contingency " + contingency.label + " islands the network");
  }
  if (!(options.coarse_step > 0.0) || !(options.refinement_step > 0.0)) {
    throw StressError(K::no_collapse, "ramp steps must be positive");
  }

  auto base = solve_at(c, contingency, bus_id, 0.0, options, nullptr);
  if (!converged(base)) {
    throw StressError(K::base_insolvable,
                      "power flow under contingency " + contingency.label + " does not converge at base load");
  }

  double good_q = 0.0;
  PowerFlowSolution good = std::get<PowerFlowSolution>(std::move(base));
  double bad_q = 0.0;
  for (long step = 1;; ++step) {
    // multiples of the step, not a running sum, so the grid stays exact
    const double q = static_cast<double>(step) * options.coarse_step;
    if (q > options.max_delta_q) {
      throw StressError(K::no_collapse, "no divergence below delta_q = " + text::format_double(options.max_delta_q));
    }
    auto outcome = solve_at(c, contingency, bus_id, q, options, &good.voltage);
    if (!converged(outcome)) {
      bad_q = q;
      break;
    }
    good_q = q;
    good = std::get<PowerFlowSolution>(std::move(outcome));
  }

  while (bad_q - good_q > options.refinement_step) {
    const double mid = 0.5 * (good_q + bad_q);
    auto outcome = solve_at(c, contingency, bus_id, mid, options, &good.voltage);
    if (converged(outcome)) {
      good_q = mid;
      good = std::get<PowerFlowSolution>(std::move(outcome));
    } else {
      bad_q = mid;
    }
  }

  CriticalLoadResult result;
  result.bus_id = bus_id;
  result.contingency = contingency;
  const auto inc = ramp_increment(c, bus_id, good_q, options);
  result.delta_q = good_q;
  result.delta_p = inc.dp;
  result.q_critical = c.buses()[c.bus_index(bus_id)].q_load + good_q;
  result.flows = line_flows(c, contingency.branches, good.voltage);
  result.solution = std::move(good);
  return result;
}

ScenarioPlan enumerate_scenarios(const Case &c, const std::vector<Contingency> &contingencies,
                                 const std::vector<int> &stressed_buses) {
  std::vector<int> buses = stressed_buses;
  std::sort(buses.begin(), buses.end());
  buses.erase(std::unique(buses.begin(), buses.end()), buses.end());
  for (int id : buses) {
    if (c.buses()[c.bus_index(id)].kind != BusKind::load) {
      throw StressError(StressError::Kind::not_load_bus, "bus " + std::to_string(id) + " is not a load bus");
    }
  }

  std::vector<Contingency> unique;
  if (contingencies.empty()) {
    unique.push_back(base_contingency());
  } else {
    for (const auto &con : contingencies) {
      c.check_outages(con.branches);
      const bool seen = std::any_of(unique.begin(), unique.end(),
                                    [&](const Contingency &u) { return u.branches == con.branches; });
      if (!seen) unique.push_back(con);
    }
  }

  ScenarioPlan plan;
  plan.contingencies = unique;
  for (const auto &con : unique) {
    const bool connected = check_connectivity(c, con.branches).connected;
    for (int id : buses) {
      Scenario sc{con, id};
      if (connected) {
        plan.scenarios.push_back(std::move(sc));
      } else {
        plan.skipped.push_back({std::move(sc), "islanded"});
      }
    }
  }
  return plan;
}

std::vector<ScreeningEntry> screen_contingencies(const Case &c, int max_order, const PowerFlowOptions &options) {
  std::vector<Contingency> candidates;
  const auto &branches = c.branches();
  for (std::size_t i = 0; i < branches.size(); ++i) {
    candidates.push_back({branches[i].id, {branches[i].id}});
  }
  if (max_order >= 2) {
    for (std::size_t i = 0; i < branches.size(); ++i) {
      for (std::size_t j = i + 1; j < branches.size(); ++j) {
        candidates.push_back({branches[i].id + "," + branches[j].id, {branches[i].id, branches[j].id}});
      }
    }
  }

  std::vector<ScreeningEntry> ranked;
  for (auto &con : candidates) {
    if (!check_connectivity(c, con.branches).connected) continue;
    auto outcome = PowerFlowProblem(c, con.branches).solve(options);
    if (!converged(outcome)) continue;
    const auto &sol = std::get<PowerFlowSolution>(outcome);
    const auto records = line_indices(c, con.branches, sol.voltage, line_flows(c, con.branches, sol.voltage));
    ScreeningEntry entry{std::move(con), 0.0, {}};
    for (const auto &rec : records) {
      if (entry.worst_branch.empty() || rec.lf > entry.max_lf) {
        entry.max_lf = rec.lf;
        entry.worst_branch = rec.branch_id;
      }
    }
    ranked.push_back(std::move(entry));
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const ScreeningEntry &a, const ScreeningEntry &b) { return a.max_lf > b.max_lf; });
  return ranked;
}

}  // namespace critbus
