#include "critbus/ranking.h"

#include <algorithm>
#include <exception>
#include <numeric>

#include <omp.h>

namespace critbus {

std::string_view to_string(ScenarioStatus status) {
  switch (status) {
    case ScenarioStatus::ok:
      return "ok";
    case ScenarioStatus::islanded:
      return "islanded";
    case ScenarioStatus::base_insolvable:
      return "base_insolvable";
  }
  return "ok";
}

ScenarioResult evaluate_scenario(const Case &c, const Scenario &scenario, const RankingOptions &options,
                                 const fuzzy::FuzzyConfig &config) {
  ScenarioResult out;
  out.scenario = scenario;
  CriticalLoadResult critical;
  try {
    critical = find_critical_load(c, scenario.contingency, scenario.bus_id, options.ramp);
  } catch (const StressError &e) {
    if (e.kind() == StressError::Kind::islanded) {
      out.status = ScenarioStatus::islanded;
    } else if (e.kind() == StressError::Kind::base_insolvable) {
      out.status = ScenarioStatus::base_insolvable;
    } else {
      throw;
    }
    out.detail = e.what();
    return out;
  }

  out.delta_q = critical.delta_q;
  out.q_critical = critical.q_critical;
  out.lines = line_indices(c, scenario.contingency.branches, critical.solution.voltage, critical.flows,
                           options.lf_formula);
  out.severity = fuzzy::criticality_index(c, critical.solution.voltage, out.lines, config);
  out.fvsi = bus_fvsi(out.lines);
  out.voltage = std::move(critical.solution.voltage);
  return out;
}

std::vector<ScenarioResult> evaluate_scenarios_serial(const Case &c, const std::vector<Scenario> &scenarios,
                                                      const RankingOptions &options,
                                                      const fuzzy::FuzzyConfig &config) {
  std::vector<ScenarioResult> results;
  results.reserve(scenarios.size());
  for (const auto &sc : scenarios) results.push_back(evaluate_scenario(c, sc, options, config));
  return results;
}

std::vector<ScenarioResult> evaluate_scenarios_parallel(const Case &c, const std::vector<Scenario> &scenarios,
                                                        const RankingOptions &options,
                                                        const fuzzy::FuzzyConfig &config) {
  const auto n = static_cast<std::int64_t>(scenarios.size());
  std::vector<ScenarioResult> results(scenarios.size());
  std::vector<std::exception_ptr> errors(scenarios.size());

  // scenario cost varies with the collapse margin, hence dynamic scheduling
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      results[k] = evaluate_scenario(c, scenarios[k], options, config);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }

  for (const auto &err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return results;
}

const RankingEntry *RankingTable::entry_for(int bus_id) const {
  for (const auto &e : entries) {
    if (e.bus_id == bus_id) return &e;
  }
  return nullptr;
}

std::vector<int> RankingTable::fuzzy_order() const {
  std::vector<int> order;
  for (const auto &e : entries) order.push_back(e.bus_id);
  return order;
}

RankingTable rank_buses(const std::vector<ScenarioResult> &results) {
  RankingTable table;
  if (!results.empty()) table.contingency = results.front().scenario.contingency;

  for (const auto &r : results) {
    if (!r.ok()) {
      table.skipped.push_back(r);
      continue;
    }
    RankingEntry e;
    e.bus_id = r.scenario.bus_id;
    e.ci = r.ci();
    e.fvsi = r.fvsi;
    table.entries.push_back(e);
  }

  auto &entries = table.entries;
  std::sort(entries.begin(), entries.end(), [](const RankingEntry &a, const RankingEntry &b) {
    if (a.ci != b.ci) return a.ci > b.ci;
    return a.bus_id < b.bus_id;
  });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].rank = static_cast<int>(i) + 1;
    const bool same_prev = i > 0 && entries[i - 1].ci == entries[i].ci;
    const bool same_next = i + 1 < entries.size() && entries[i + 1].ci == entries[i].ci;
    entries[i].tied = same_prev || same_next;
  }

  std::vector<std::size_t> by_fvsi(entries.size());
  std::iota(by_fvsi.begin(), by_fvsi.end(), std::size_t{0});
  std::sort(by_fvsi.begin(), by_fvsi.end(), [&](std::size_t a, std::size_t b) {
    if (entries[a].fvsi != entries[b].fvsi) return entries[a].fvsi > entries[b].fvsi;
    return entries[a].bus_id < entries[b].bus_id;
  });
  for (std::size_t r = 0; r < by_fvsi.size(); ++r) {
    auto &e = entries[by_fvsi[r]];
    e.fvsi_rank = static_cast<int>(r) + 1;
    e.agrees = e.fvsi_rank == e.rank;
    table.fvsi_order.push_back(e.bus_id);
  }
  return table;
}

AgreementReport compare_with_fvsi(const std::vector<RankingTable> &tables) {
  AgreementReport report;
  for (const auto &t : tables) {
    AgreementRow row;
    row.contingency = t.contingency.label;
    row.fuzzy_order = t.fuzzy_order();
    row.fvsi_order = t.fvsi_order;
    for (const auto &e : t.entries) {
      ++report.total_buses;
      if (e.agrees) {
        ++report.matching_buses;
      } else {
        row.disagreeing_buses.push_back(e.bus_id);
      }
    }
    std::sort(row.disagreeing_buses.begin(), row.disagreeing_buses.end());
    if (row.disagreeing_buses.empty()) ++report.identical_orders;
    report.rows.push_back(std::move(row));
  }
  return report;
}

RankingRun run_ranking(const Case &c, const std::vector<Contingency> &contingencies,
                       const std::vector<int> &stressed_buses, const RankingOptions &options,
                       const fuzzy::FuzzyConfig &config, Execution execution) {
  if (!converged(PowerFlowProblem(c).solve(options.ramp.powerflow))) {
    throw BaseInsolvable("intact network has no power-flow solution at base load");
  }

  const ScenarioPlan plan = enumerate_scenarios(c, contingencies, stressed_buses);
  auto evaluated = execution == Execution::serial ? evaluate_scenarios_serial(c, plan.scenarios, options, config)
                                                  : evaluate_scenarios_parallel(c, plan.scenarios, options, config);

  RankingRun run;
  std::size_t next_eval = 0;
  std::size_t next_skip = 0;
  for (const auto &con : plan.contingencies) {
    std::vector<ScenarioResult> group;
    while (next_eval < plan.scenarios.size() && plan.scenarios[next_eval].contingency == con) {
      group.push_back(std::move(evaluated[next_eval++]));
    }
    while (next_skip < plan.skipped.size() && plan.skipped[next_skip].scenario.contingency == con) {
      ScenarioResult skip;
      skip.scenario = plan.skipped[next_skip].scenario;
      skip.status = ScenarioStatus::islanded;
      skip.detail = plan.skipped[next_skip].reason;
      group.push_back(std::move(skip));
      ++next_skip;
    }
    if (group.empty()) continue;
    RankingTable table = rank_buses(group);
    table.contingency = con;
    run.tables.push_back(std::move(table));
    for (auto &r : group) run.results.push_back(std::move(r));
  }
  return run;
}

}  // namespace critbus
