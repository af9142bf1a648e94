#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "critbus/case_model.h"
#include "critbus/powerflow.h"

namespace critbus {

/// Which denominator the Line Flow index uses.
enum class LfFormula {
  /// P_R / P_R(max) with P_R(max) = Vs^2 Y cos(phi) / (2 (1 + cos(theta - phi))).
  max_transfer,
  /// Compatibility form: Vr^2 Y cos(theta) in place of Vs^2 Y cos(phi).
  receiving_voltage,
  /// True maximum-transfer bound for a load of power angle phi: cos(theta + phi) in place of cos(theta - phi).
  exact_bound,
};

std::string_view to_string(LfFormula formula);
/// Parses "max_transfer", "receiving_voltage" or "exact_bound"; throws std::invalid_argument otherwise.
LfFormula parse_lf_formula(std::string_view name);

struct LineIndexRecord {
  std::string branch_id;
  double lf = 0.0;
  std::optional<double> fvsi;  ///< absent for branches with zero reactance
  double phi = 0.0;            ///< receiving-end power angle, atan2(Q_recv, P_recv)
  double theta = 0.0;          ///< angle of the series admittance
};

/**
 * Line Flow index of one oriented branch flow.
 *
 * Uses the series admittance only (line charging excluded). A branch that
 * delivers no real power to its receiving end (P_recv <= 0) scores 0.
 */
double lf_index(const BranchFlow &flow, const Branch &branch, double v_sending, double v_receiving = 1.0,
                LfFormula formula = LfFormula::max_transfer);

/// Fast Voltage Stability Index 4 Z^2 Q_recv / (Vs^2 X); nullopt when X == 0.
std::optional<double> fvsi(const Branch &branch, double q_recv, double v_sending);

/// Index records for every in-service branch, in case branch order.
std::vector<LineIndexRecord> line_indices(const Case &c, const OutageSet &outages, const VoltageState &state,
                                          const std::vector<BranchFlow> &flows,
                                          LfFormula formula = LfFormula::max_transfer);

/// Largest FVSI among the records, 0 when none is defined.
double bus_fvsi(const std::vector<LineIndexRecord> &records);

}  // namespace critbus
