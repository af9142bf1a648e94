#pragma once

#include <map>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "critbus/case_model.h"

namespace critbus {

struct PowerFlowOptions {
  double tol = 1e-6;  ///< max absolute P/Q mismatch, per-unit
  int max_iter = 30;
  /// Ignore any supplied start point and begin from flat_start().
  bool flat_start = false;
  /// Per-iteration mismatch trace; nullptr disables.
  std::ostream *trace = nullptr;
};

/// Polar bus voltages indexed by bus ordinal.
struct VoltageState {
  Eigen::VectorXd magnitude;
  Eigen::VectorXd angle;  ///< radians
};

struct PowerFlowSolution {
  VoltageState voltage;
  int iterations = 0;
  double max_mismatch = 0.0;
};

enum class DivergenceReason { iteration_limit, singular_jacobian, voltage_out_of_range };

std::string_view to_string(DivergenceReason reason);

struct Diverged {
  DivergenceReason reason = DivergenceReason::iteration_limit;
  int iterations = 0;
  double last_mismatch = 0.0;
};

using SolveOutcome = std::variant<PowerFlowSolution, Diverged>;

inline bool converged(const SolveOutcome &outcome) { return std::holds_alternative<PowerFlowSolution>(outcome); }

/// Additional load at a bus, per-unit; added on top of the scheduled load.
struct LoadIncrement {
  double dp = 0.0;
  double dq = 0.0;
};

using LoadOverrides = std::map<int, LoadIncrement>;

/**
 * One power-flow scenario: network, outages, and load overrides frozen into
 * the Y-bus and the scheduled injections.
 *
 * Unknown ordering used by mismatch() and jacobian(): angles of every
 * non-slack bus (ascending bus ordinal), then magnitudes of every load bus.
 */
class PowerFlowProblem {
 public:
  PowerFlowProblem(const Case &c, const OutageSet &outages = {}, const LoadOverrides &overrides = {});

  const Case &network() const { return *case_; }
  const AdmittanceMatrix &ybus() const { return ybus_; }
  const Eigen::VectorXd &scheduled_p() const { return p_sched_; }
  const Eigen::VectorXd &scheduled_q() const { return q_sched_; }

  /// Buses whose angle is unknown (all but slack).
  const std::vector<std::size_t> &angle_buses() const { return angle_buses_; }
  /// Buses whose magnitude is unknown (load buses).
  const std::vector<std::size_t> &magnitude_buses() const { return magnitude_buses_; }
  std::size_t unknown_count() const { return angle_buses_.size() + magnitude_buses_.size(); }

  /// V = 1.0, angle 0 at load buses; setpoints at slack and generators.
  VoltageState flat_start() const;

  /// Complex power injected into the network at every bus, S_i = V_i conj(sum_k Y_ik V_k).
  Eigen::VectorXcd injections(const VoltageState &state) const;

  /// Scheduled minus computed injection: dP at non-slack buses, then dQ at load buses.
  Eigen::VectorXd mismatch(const VoltageState &state) const;

  /// d(P,Q computed)/d(angle, magnitude) over the reduced unknowns; J * dx = mismatch.
  Eigen::MatrixXd jacobian(const VoltageState &state) const;

  /// Full Newton-Raphson. Iterates from `start` unless it is null or options.flat_start is set.
  SolveOutcome solve(const PowerFlowOptions &options, const VoltageState *start = nullptr) const;

 private:
  const Case *case_;
  AdmittanceMatrix ybus_;
  Eigen::VectorXd p_sched_;
  Eigen::VectorXd q_sched_;
  std::vector<std::size_t> angle_buses_;
  std::vector<std::size_t> magnitude_buses_;
};

/// Convenience wrapper matching the one-shot call pattern.
SolveOutcome solve(const Case &c, const OutageSet &outages, const LoadOverrides &overrides,
                   const PowerFlowOptions &options);

/// Pi-model flows oriented so that real power enters the branch at the sending end.
struct BranchFlow {
  std::string branch_id;
  int sending_bus = 0;
  int receiving_bus = 0;
  double p_send = 0.0;  ///< injected into the branch at the sending end
  double q_send = 0.0;
  double p_recv = 0.0;  ///< delivered to the receiving bus
  double q_recv = 0.0;
  double p_loss = 0.0;
  double q_loss = 0.0;
};

std::vector<BranchFlow> line_flows(const Case &c, const OutageSet &outages, const VoltageState &state);

}  // namespace critbus
