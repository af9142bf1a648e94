#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "critbus/case_model.h"
#include "critbus/powerflow.h"

namespace critbus {

/// A named set of outaged branches. The label uses "from-to" pairs joined by commas.
struct Contingency {
  std::string label;
  OutageSet branches;

  bool is_base() const { return branches.empty(); }
  bool operator==(const Contingency &) const = default;
};

Contingency base_contingency();

/// Resolves a label such as "1-2,2-3" against the case's branch endpoints (either order).
Contingency parse_contingency(const Case &c, std::string_view label);
/// One contingency per non-empty, non-comment line.
std::vector<Contingency> parse_contingency_list(const Case &c, std::string_view text);
std::vector<Contingency> load_contingency_file(const Case &c, const std::string &path);

struct RampOptions {
  double coarse_step = 0.05;      ///< pu reactive load per ramp step
  double refinement_step = 0.005; ///< bisection stops when the bracket is this narrow
  double max_delta_q = 100.0;     ///< give up if no collapse below this increment
  bool warm_start = true;
  /// Ramp P alongside Q at the bus's base load power factor instead of Q alone.
  bool constant_power_factor = false;
  PowerFlowOptions powerflow;
};

struct CriticalLoadResult {
  int bus_id = 0;
  Contingency contingency;
  double delta_q = 0.0;     ///< reactive increment at the last convergent point
  double q_critical = 0.0;  ///< total reactive load at the bus there (base + delta_q)
  double delta_p = 0.0;     ///< nonzero only for constant-power-factor ramps
  PowerFlowSolution solution;
  std::vector<BranchFlow> flows;
};

class StressError : public std::runtime_error {
 public:
  enum class Kind { islanded, base_insolvable, not_load_bus, no_collapse };

  StressError(Kind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Load increment applied by a ramp of size delta_q at `bus_id`.
LoadIncrement ramp_increment(const Case &c, int bus_id, double delta_q, const RampOptions &options);

/**
 * Largest reactive load increment at `bus_id` for which Newton-Raphson still
 * converges under `contingency`.
 *
 * Coarse warm-started ramp until the first divergence, then bisection between
 * the last convergent and first divergent increments until the bracket is no
 * wider than refinement_step. Returns the last convergent point.
 */
CriticalLoadResult find_critical_load(const Case &c, const Contingency &contingency, int bus_id,
                                      const RampOptions &options = {});

struct Scenario {
  Contingency contingency;
  int bus_id = 0;

  bool operator==(const Scenario &) const = default;
};

struct ScenarioSkip {
  Scenario scenario;
  std::string reason;
};

struct ScenarioPlan {
  std::vector<Contingency> contingencies;  ///< deduplicated, input order
  std::vector<Scenario> scenarios;
  std::vector<ScenarioSkip> skipped;
};

/**
 * Cross product of contingencies and stressed load buses in deterministic
 * order (contingency list order, then ascending bus id). Duplicate
 * contingencies (same branch set) keep their first occurrence; islanding
 * contingencies are reported in `skipped`. An empty contingency list means
 * the base network alone.
 */
ScenarioPlan enumerate_scenarios(const Case &c, const std::vector<Contingency> &contingencies,
                                 const std::vector<int> &stressed_buses);

/// Post-outage loading of one contingency at base load, for screening.
struct ScreeningEntry {
  Contingency contingency;
  double max_lf = 0.0;
  std::string worst_branch;
};

/**
 * Ranks every single and (when max_order >= 2) double line outage by the
 * largest Line Flow index at base load, descending. Islanding or
 * non-convergent outages are left out.
 */
std::vector<ScreeningEntry> screen_contingencies(const Case &c, int max_order = 2,
                                                 const PowerFlowOptions &options = {});

}  // namespace critbus
