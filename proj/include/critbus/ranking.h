#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "critbus/fuzzy.h"
#include "critbus/indices.h"
#include "critbus/stress.h"

namespace critbus {

struct RankingOptions {
  RampOptions ramp;
  LfFormula lf_formula = LfFormula::max_transfer;
};

enum class ScenarioStatus { ok, islanded, base_insolvable };

std::string_view to_string(ScenarioStatus status);

/// Outcome of one (contingency, stressed bus) pair.
struct ScenarioResult {
  Scenario scenario;
  ScenarioStatus status = ScenarioStatus::ok;
  std::string detail;  ///< reason text for skipped scenarios

  // populated only when status == ok
  double delta_q = 0.0;
  double q_critical = 0.0;
  VoltageState voltage;
  std::vector<LineIndexRecord> lines;
  fuzzy::SeverityResult severity;
  double fvsi = 0.0;

  bool ok() const { return status == ScenarioStatus::ok; }
  double ci() const { return severity.ci; }
};

/// Critical-load search, line indices and Criticality Index for one connected scenario.
ScenarioResult evaluate_scenario(const Case &c, const Scenario &scenario, const RankingOptions &options,
                                 const fuzzy::FuzzyConfig &config);

/// Reference implementation: one scenario after another.
std::vector<ScenarioResult> evaluate_scenarios_serial(const Case &c, const std::vector<Scenario> &scenarios,
                                                      const RankingOptions &options, const fuzzy::FuzzyConfig &config);

/// OpenMP fan-out over scenarios; output order and values match the serial path.
std::vector<ScenarioResult> evaluate_scenarios_parallel(const Case &c, const std::vector<Scenario> &scenarios,
                                                        const RankingOptions &options,
                                                        const fuzzy::FuzzyConfig &config);

struct RankingEntry {
  int bus_id = 0;
  double ci = 0.0;
  int rank = 0;        ///< dense 1..k by CI descending, ties by bus id
  bool tied = false;   ///< CI equal to a neighbour's
  double fvsi = 0.0;
  int fvsi_rank = 0;   ///< dense 1..k by FVSI descending, ties by bus id
  bool agrees = false; ///< rank == fvsi_rank
};

struct RankingTable {
  Contingency contingency;
  std::vector<RankingEntry> entries;  ///< in fuzzy rank order
  std::vector<int> fvsi_order;        ///< bus ids by FVSI rank
  std::vector<ScenarioResult> skipped;

  const RankingEntry *entry_for(int bus_id) const;
  std::vector<int> fuzzy_order() const;
};

/// Ranks the evaluated buses of one contingency. Skipped results are carried along unranked.
RankingTable rank_buses(const std::vector<ScenarioResult> &results);

struct AgreementRow {
  std::string contingency;
  std::vector<int> fuzzy_order;
  std::vector<int> fvsi_order;
  std::vector<int> disagreeing_buses;
};

struct AgreementReport {
  std::vector<AgreementRow> rows;
  int matching_buses = 0;
  int total_buses = 0;
  int identical_orders = 0;

  double agreement_ratio() const { return total_buses == 0 ? 1.0 : double(matching_buses) / total_buses; }
};

AgreementReport compare_with_fvsi(const std::vector<RankingTable> &tables);

class BaseInsolvable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Execution { serial, parallel };

struct RankingRun {
  std::vector<ScenarioResult> results;  ///< enumeration order, skips included
  std::vector<RankingTable> tables;     ///< one per contingency, enumeration order
};

/**
 * Full pipeline: enumerate scenarios, find each critical load, score it, rank
 * per contingency. Throws BaseInsolvable when the intact network has no
 * power-flow solution; contingency-level failures become skip records.
 */
RankingRun run_ranking(const Case &c, const std::vector<Contingency> &contingencies,
                       const std::vector<int> &stressed_buses, const RankingOptions &options,
                       const fuzzy::FuzzyConfig &config, Execution execution = Execution::parallel);

}  // namespace critbus
