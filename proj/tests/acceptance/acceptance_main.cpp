// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "critbus/case_model.h"
#include "critbus/fuzzy.h"
#include "critbus/indices.h"
#include "critbus/powerflow.h"
#include "critbus/ranking.h"
#include "critbus/report.h"
#include "critbus/stress.h"
#include "critbus/text_util.h"

using namespace critbus;

namespace {

const std::string kData = CRITBUS_DATA_DIR;

int failures = 0;

void report(int id, bool ok, const std::string &what, const std::string &detail) {
  std::cout << "AC" << id << ' ' << (ok ? "PASS" : "FAIL") << "  " << what << "  [" << detail << "]\n";
  if (!ok) ++failures;
}

std::string fmt(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double vm(const Case &c, const VoltageState &v, int bus) {
  return v.magnitude(static_cast<Eigen::Index>(c.bus_index(bus)));
}

struct Fixture {
  Case network = load_case_file(kData + "/five_bus.case");
  std::vector<Contingency> contingencies = load_contingency_file(network, kData + "/critical_contingencies.txt");
  fuzzy::FuzzyConfig config = fuzzy::FuzzyConfig::defaults();
  std::map<int, CriticalLoadResult> base_critical;

  Fixture() {
    for (int bus : {3, 4, 5}) base_critical.emplace(bus, find_critical_load(network, base_contingency(), bus));
  }
};

void base_voltages(const Fixture &f) {
  const auto sol = std::get<PowerFlowSolution>(PowerFlowProblem(f.network).solve({}));
  const double expected[] = {0.987, 0.984, 0.972};
  bool ok = true;
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    const double v = vm(f.network, sol.voltage, 3 + i);
    ok = ok && std::abs(v - expected[i]) <= 0.001;
    detail += (i ? ", " : "") + std::string("V") + std::to_string(3 + i) + "=" + fmt(v, 4) + " vs " + fmt(expected[i]);
  }
  report(1, ok, "base-case load-bus voltages within 0.001 pu", detail);
}

void critical_voltages(const Fixture &f) {
  const double expected[3][3] = {{0.700, 0.752, 0.892}, {0.808, 0.754, 0.893}, {0.889, 0.748, 0.751}};
  bool ok = true;
  std::string detail;
  for (int s = 0; s < 3; ++s) {
    const auto &r = f.base_critical.at(3 + s);
    detail += (s ? "; " : "") + std::string("stress ") + std::to_string(3 + s) + ":";
    for (int b = 0; b < 3; ++b) {
      const double v = vm(f.network, r.solution.voltage, 3 + b);
      ok = ok && std::abs(v - expected[s][b]) <= 0.01;
      detail += " " + fmt(v) + "/" + fmt(expected[s][b]);
    }
  }
  report(2, ok, "critical-load voltages within 0.01 pu", detail);
}

void lf_columns(const Fixture &f) {
  const std::vector<std::string> ids = {"1-2", "1-3", "2-3", "2-4", "2-5", "3-4", "4-5"};
  const double base_ref[] = {0.083, 0.187, 0.128, 0.141, 0.168, 0.015, 0.038};
  const double crit_ref[3][7] = {{0.135, 0.155, 0.092, 0.096, 0.125, 0.325, 0.784},
                                 {0.115, 0.146, 0.075, 0.086, 0.120, 0.015, 0.770},
                                 {0.150, 0.189, 0.061, 0.059, 0.133, 0.006, 0.571}};
  const auto base = std::get<PowerFlowSolution>(PowerFlowProblem(f.network).solve({}));
  const auto base_flows = line_flows(f.network, {}, base.voltage);

  bool any = false;
  std::string detail;
  for (auto formula : {LfFormula::max_transfer, LfFormula::receiving_voltage, LfFormula::exact_bound}) {
    const auto recs = line_indices(f.network, {}, base.voltage, base_flows, formula);
    double worst_base = 0.0, worst_crit = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) worst_base = std::max(worst_base, std::abs(recs[i].lf - base_ref[i]));
    for (int s = 0; s < 3; ++s) {
      const auto &r = f.base_critical.at(3 + s);
      const auto cr = line_indices(f.network, {}, r.solution.voltage, r.flows, formula);
      for (std::size_t i = 0; i < ids.size(); ++i) worst_crit = std::max(worst_crit, std::abs(cr[i].lf - crit_ref[s][i]));
    }
    const bool base_ok = worst_base <= 0.02;
    const bool crit_ok = worst_crit <= 0.05;
    any = any || (base_ok && crit_ok);
    detail += (detail.empty() ? "" : "; ") + std::string(to_string(formula)) + ": base max err " + fmt(worst_base) +
              (base_ok ? " ok" : " miss") + ", critical max err " + fmt(worst_crit) + (crit_ok ? " ok" : " miss");
  }
  report(3, any, "LF base column within 0.02 and critical column within 0.05 for some variant", detail);
}

void fvsi_values(const Fixture &f) {
  const double expected[] = {0.966, 0.964, 0.679};
  bool values_ok = true;
  std::vector<std::pair<double, int>> order;
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    const auto &r = f.base_critical.at(3 + i);
    const double v = bus_fvsi(line_indices(f.network, {}, r.solution.voltage, r.flows));
    values_ok = values_ok && std::abs(v - expected[i]) <= 0.05;
    order.push_back({-v, 3 + i});
    detail += (i ? ", " : "") + std::string("bus ") + std::to_string(3 + i) + " " + fmt(v) + " vs " + fmt(expected[i]);
  }
  std::sort(order.begin(), order.end());
  const bool order_ok = order[0].second == 3 && order[1].second == 4 && order[2].second == 5;
  detail += std::string("; order ") + std::to_string(order[0].second) + "," + std::to_string(order[1].second) + "," +
            std::to_string(order[2].second) + (order_ok ? " ok" : " wrong");
  report(4, values_ok && order_ok, "bus FVSI within 0.05 and ranking 3,4,5", detail);
}

void base_ranking(const Fixture &f) {
  const auto run = run_ranking(f.network, {}, {3, 4, 5}, {}, f.config);
  const auto order = run.tables.at(0).fuzzy_order();
  std::string detail = "order";
  for (int b : order) detail += " " + std::to_string(b);
  detail += "; CI";
  for (const auto &e : run.tables[0].entries) detail += " " + std::to_string(e.bus_id) + ":" + fmt(e.ci, 2);
  report(5, order == std::vector<int>{3, 4, 5}, "intact-network fuzzy ranking is 3,4,5", detail);
}

void contingency_ranking(const Fixture &f) {
  // acceptable top-ranked buses per contingency, in file order
  const std::map<std::string, std::set<int>> top = {
      {"1-2", {3}},     {"2-5", {3}},     {"1-2,2-3", {3}}, {"2-3,2-5", {3, 4}}, {"2-5,3-4", {3}}, {"1-2,3-4", {4}},
      {"2-4,2-5", {3, 4}}, {"1-2,2-5", {4}}, {"1-2,2-4", {5}}, {"1-3,2-5", {3}}, {"1-3", {4}},     {"2-4", {3}}};
  const auto run = run_ranking(f.network, f.contingencies, {3, 4, 5}, {}, f.config);
  int matches = 0;
  std::string misses;
  for (const auto &t : run.tables) {
    const int first = t.entries.empty() ? 0 : t.entries.front().bus_id;
    if (top.at(t.contingency.label).contains(first)) {
      ++matches;
    } else {
      misses += (misses.empty() ? "" : ", ") + t.contingency.label + " top " + std::to_string(first);
    }
  }
  report(6, matches >= 9, "top-ranked bus matches in at least 9 of 12 contingencies",
         std::to_string(matches) + "/12; misses: " + misses);
}

// ---- property suite ------------------------------------------------------------

bool jacobian_property(const Fixture &f, std::string &note) {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> vmag(0.7, 1.1), vang(-0.5, 0.5);
  const PowerFlowProblem pf(f.network);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    VoltageState s = pf.flat_start();
    for (auto i : pf.angle_buses()) s.angle(static_cast<Eigen::Index>(i)) = vang(rng);
    for (auto i : pf.magnitude_buses()) s.magnitude(static_cast<Eigen::Index>(i)) = vmag(rng);
    const Eigen::MatrixXd j = pf.jacobian(s);
    const std::size_t na = pf.angle_buses().size();
    for (std::size_t col = 0; col < pf.unknown_count(); ++col) {
      VoltageState p = s, m = s;
      const double h = 1e-6;
      if (col < na) {
        p.angle(static_cast<Eigen::Index>(pf.angle_buses()[col])) += h;
        m.angle(static_cast<Eigen::Index>(pf.angle_buses()[col])) -= h;
      } else {
        p.magnitude(static_cast<Eigen::Index>(pf.magnitude_buses()[col - na])) += h;
        m.magnitude(static_cast<Eigen::Index>(pf.magnitude_buses()[col - na])) -= h;
      }
      const Eigen::VectorXd fd = -(pf.mismatch(p) - pf.mismatch(m)) / (2.0 * h);
      for (Eigen::Index row = 0; row < fd.size(); ++row) {
        const double a = j(row, static_cast<Eigen::Index>(col));
        worst = std::max(worst, std::abs(a - fd(row)) / std::max(1.0, std::abs(a)));
      }
    }
  }
  note = "jacobian rel err " + text::format_double(worst);
  return worst <= 1e-4;
}

bool convergence_certificate(const Fixture &f, const std::vector<ScenarioResult> &results, std::string &note) {
  double worst = 0.0;
  for (const auto &r : results) {
    const auto inc = ramp_increment(f.network, r.scenario.bus_id, r.delta_q, {});
    const PowerFlowProblem pf(f.network, r.scenario.contingency.branches, {{r.scenario.bus_id, inc}});
    worst = std::max(worst, pf.mismatch(r.voltage).cwiseAbs().maxCoeff());
  }
  note = "certificate max mismatch " + text::format_double(worst);
  return worst <= PowerFlowOptions{}.tol;
}

bool bracketing_and_oracle(const Fixture &f, const std::vector<ScenarioResult> &results, std::string &note) {
  const RampOptions opt;
  int bracket_fail = 0, oracle_fail = 0;
  for (const auto &r : results) {
    const auto &con = r.scenario.contingency;
    const int bus = r.scenario.bus_id;
    auto flat = [&](double dq) {
      return converged(PowerFlowProblem(f.network, con.branches, {{bus, {0.0, dq}}}).solve({}));
    };
    if (!flat(r.delta_q) || flat(r.delta_q + opt.refinement_step)) ++bracket_fail;
    double last = 0.0;
    for (long k = 1;; ++k) {
      const double dq = 0.001 * static_cast<double>(k);
      if (!flat(dq)) break;
      last = dq;
    }
    if (std::abs(last - r.delta_q) > opt.refinement_step) ++oracle_fail;
  }
  note = "bracketing failures " + std::to_string(bracket_fail) + "/" + std::to_string(results.size()) +
         ", oracle disagreements " + std::to_string(oracle_fail);
  return bracket_fail == 0 && oracle_fail == 0 && results.size() == 36;
}

bool lf_below_one(const std::vector<ScenarioResult> &results, std::string &note) {
  double worst = 0.0;
  int over = 0;
  std::string where;
  for (const auto &r : results) {
    for (const auto &rec : r.lines) {
      if (rec.lf >= 1.0) ++over;
      if (rec.lf > worst) {
        worst = rec.lf;
        where = r.scenario.contingency.label + " bus " + std::to_string(r.scenario.bus_id) + " line " + rec.branch_id;
      }
    }
  }
  note = "max LF " + fmt(worst) + " (" + where + "), " + std::to_string(over) + " line states >= 1";
  return over == 0;
}

bool si_lf_monotone(const Fixture &f, std::string &note) {
  double last = -1.0;
  int drops = 0;
  for (int i = 0; i < 1000; ++i) {
    const double s = fuzzy::severity_lf(f.config.lf.hi * i / 999.0, f.config);
    if (s < last) ++drops;
    last = s;
  }
  note = "SI_LF decreases " + std::to_string(drops);
  return drops == 0;
}

bool ci_additivity(const std::vector<ScenarioResult> &results, std::string &note) {
  int bad = 0;
  for (const auto &r : results) {
    std::vector<double> vp, lf;
    for (const auto &b : r.severity.buses) vp.push_back(b.si);
    for (const auto &l : r.severity.lines) lf.push_back(l.si);
    if (r.severity.ci != r.severity.sum_si_vp + r.severity.sum_si_lf) ++bad;
    if (r.severity.sum_si_vp != fuzzy::canonical_sum(vp) || r.severity.sum_si_lf != fuzzy::canonical_sum(lf)) ++bad;
  }
  note = "additivity violations " + std::to_string(bad);
  return bad == 0;
}

bool json_determinism(const Fixture &f, std::string &note) {
  ReportContext ctx;
  ctx.config = f.config;
  std::string out[2];
  for (auto &o : out) {
    std::ostringstream s;
    emit_report(run_ranking(f.network, f.contingencies, {3, 4, 5}, {}, f.config), ctx, ReportFormat::json, s);
    o = s.str();
  }
  note = std::string("json ") + (out[0] == out[1] ? "identical" : "differs") + " (" + std::to_string(out[0].size()) +
         " bytes)";
  return out[0] == out[1];
}

void property_suite(const Fixture &f) {
  const auto plan = enumerate_scenarios(f.network, f.contingencies, {3, 4, 5});
  const auto results = evaluate_scenarios_parallel(f.network, plan.scenarios, {}, f.config);

  std::vector<std::string> notes(7);
  const bool checks[] = {
      jacobian_property(f, notes[0]),        convergence_certificate(f, results, notes[1]),
      bracketing_and_oracle(f, results, notes[2]), lf_below_one(results, notes[3]),
      si_lf_monotone(f, notes[4]),           ci_additivity(results, notes[5]),
      json_determinism(f, notes[6]),
  };
  bool ok = true;
  std::string detail;
  for (int i = 0; i < 7; ++i) {
    ok = ok && checks[i];
    detail += (i ? "; " : "") + std::string(checks[i] ? "ok " : "FAILED ") + notes[i];
  }
  report(7, ok, "property suite", detail);
}

}  // namespace

int main() {
  try {
    const Fixture f;
    base_voltages(f);
    critical_voltages(f);
    lf_columns(f);
    fvsi_values(f);
    base_ranking(f);
    contingency_ranking(f);
    property_suite(f);
  } catch (const std::exception &e) {
    std::cout << "acceptance aborted: " << e.what() << '\n';
    return 2;
  }
  std::cout << (7 - failures) << "/7 criteria pass\n";
  return failures == 0 ? 0 : 1;
}
