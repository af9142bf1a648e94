#include "critbus/indices.h"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace critbus {

std::string_view to_string(LfFormula formula) {
  switch (formula) {
    case LfFormula::max_transfer:
      return "max_transfer";
    case LfFormula::receiving_voltage:
      return "receiving_voltage";
    case LfFormula::exact_bound:
      return "exact_bound";
  }
  return "max_transfer";
}

LfFormula parse_lf_formula(std::string_view name) {
  for (auto f : {LfFormula::max_transfer, LfFormula::receiving_voltage, LfFormula::exact_bound}) {
    if (to_string(f) == name) return f;
  }
  throw std::invalid_argument("unknown LF formula '" + std::string(name) + "'");
}

double lf_index(const BranchFlow &flow, const Branch &branch, double v_sending, double v_receiving,
                LfFormula formula) {
  if (!(flow.p_recv > 0.0)) return 0.0;

  const std::complex<double> y = branch.series_admittance();
  const double y_mag = std::abs(y);
  const double theta = std::arg(y);
  const double phi = std::atan2(flow.q_recv, flow.p_recv);
  const double numerator = 2.0 * flow.p_recv * (1.0 + std::cos(theta - phi));

  switch (formula) {
    case LfFormula::max_transfer:
      return numerator / (v_sending * v_sending * y_mag * std::cos(phi));
    case LfFormula::receiving_voltage:
      return numerator / (v_receiving * v_receiving * y_mag * std::cos(theta));
    case LfFormula::exact_bound:
      // load admittance angle is -phi, so the series/load angle difference is theta + phi
      return 2.0 * flow.p_recv * (1.0 + std::cos(theta + phi)) / (v_sending * v_sending * y_mag * std::cos(phi));
  }
  return 0.0;
}

std::optional<double> fvsi(const Branch &branch, double q_recv, double v_sending) {
  if (branch.x == 0.0) return std::nullopt;
  const double z2 = branch.r * branch.r + branch.x * branch.x;
  return 4.0 * z2 * q_recv / (v_sending * v_sending * branch.x);
}

std::vector<LineIndexRecord> line_indices(const Case &c, const OutageSet &outages, const VoltageState &state,
                                          const std::vector<BranchFlow> &flows, LfFormula formula) {
  std::vector<LineIndexRecord> records;
  records.reserve(flows.size());
  for (const auto &flow : flows) {
    const Branch &br = c.branches()[c.branch_index(flow.branch_id)];
    if (!c.in_service(br, outages)) continue;
    const double vs = state.magnitude(static_cast<Eigen::Index>(c.bus_index(flow.sending_bus)));
    const double vr = state.magnitude(static_cast<Eigen::Index>(c.bus_index(flow.receiving_bus)));

    LineIndexRecord rec;
    rec.branch_id = br.id;
    rec.theta = std::arg(br.series_admittance());
    rec.phi = std::atan2(flow.q_recv, flow.p_recv);
    rec.lf = lf_index(flow, br, vs, vr, formula);
    rec.fvsi = fvsi(br, flow.q_recv, vs);
    if (!rec.fvsi) std::cerr << "warning: FVSI undefined for zero-reactance branch " << br.id << '\n';
    records.push_back(std::move(rec));
  }
  return records;
}

double bus_fvsi(const std::vector<LineIndexRecord> &records) {
  double worst = 0.0;
  bool any = false;
  for (const auto &rec : records) {
    if (!rec.fvsi) continue;
    worst = any ? std::max(worst, *rec.fvsi) : *rec.fvsi;
    any = true;
  }
  return any ? worst : 0.0;
}

}  // namespace critbus
