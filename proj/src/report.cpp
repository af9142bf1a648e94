#include "critbus/report.h"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "critbus/text_util.h"

namespace critbus {

using nlohmann::ordered_json;

ReportFormat parse_report_format(std::string_view name) {
  if (name == "human") return ReportFormat::human;
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw std::invalid_argument("unknown report format '" + std::string(name) + "'");
}

std::string roman(int value) {
  static constexpr std::pair<int, const char *> kDigits[] = {{1000, "M"}, {900, "CM"}, {500, "D"}, {400, "CD"},
                                                             {100, "C"},  {90, "XC"},  {50, "L"},  {40, "XL"},
                                                             {10, "X"},   {9, "IX"},   {5, "V"},   {4, "IV"},
                                                             {1, "I"}};
  std::string out;
  for (const auto &[v, s] : kDigits) {
    while (value >= v) {
      out += s;
      value -= v;
    }
  }
  return out;
}

namespace {

ordered_json partition_json(const fuzzy::Partition &p) {
  ordered_json terms = ordered_json::array();
  for (const auto &mf : p.terms) {
    terms.push_back({{"label", mf.label}, {"breakpoints", {mf.shape.a, mf.shape.b, mf.shape.c, mf.shape.d}}});
  }
  return {{"lo", p.lo}, {"hi", p.hi}, {"terms", terms}};
}

ordered_json rules_json(const std::vector<fuzzy::Rule> &rules) {
  ordered_json out = ordered_json::array();
  for (const auto &r : rules) out.push_back({{"if", r.input}, {"then", r.output}});
  return out;
}

ordered_json context_json(const ReportContext &ctx) {
  const auto &ramp = ctx.options.ramp;
  return {
      {"case", ctx.case_source},
      {"contingencies", ctx.contingency_source},
      {"solver",
       {{"method", "newton-raphson"},
        {"tol", ramp.powerflow.tol},
        {"max_iter", ramp.powerflow.max_iter}}},
      {"ramp",
       {{"coarse_step", ramp.coarse_step},
        {"refinement_step", ramp.refinement_step},
        {"max_delta_q", ramp.max_delta_q},
        {"warm_start", ramp.warm_start},
        {"constant_power_factor", ramp.constant_power_factor}}},
      {"lf_formula", std::string(to_string(ctx.options.lf_formula))},
      {"fuzzy",
       {{"grid_points", ctx.config.grid_points},
        {"voltage", partition_json(ctx.config.voltage)},
        {"lf", partition_json(ctx.config.lf)},
        {"severity", partition_json(ctx.config.severity)},
        {"voltage_rules", rules_json(ctx.config.voltage_rules)},
        {"lf_rules", rules_json(ctx.config.lf_rules)}}},
  };
}

ordered_json scenario_json(const ScenarioResult &r) {
  ordered_json j = {{"contingency", r.scenario.contingency.label},
                    {"bus", r.scenario.bus_id},
                    {"status", std::string(to_string(r.status))}};
  if (!r.ok()) {
    j["detail"] = r.detail;
    return j;
  }
  j["delta_q_pu"] = r.delta_q;
  j["q_critical_pu"] = r.q_critical;
  ordered_json buses = ordered_json::array();
  for (const auto &b : r.severity.buses) buses.push_back({{"bus", b.bus_id}, {"v_pu", b.voltage}, {"si_vp", b.si}});
  ordered_json lines = ordered_json::array();
  for (std::size_t i = 0; i < r.lines.size(); ++i) {
    const auto &rec = r.lines[i];
    ordered_json line = {{"branch", rec.branch_id}, {"lf", rec.lf}};
    line["fvsi"] = rec.fvsi ? ordered_json(*rec.fvsi) : ordered_json(nullptr);
    line["si_lf"] = r.severity.lines[i].si;
    lines.push_back(std::move(line));
  }
  j["load_buses"] = std::move(buses);
  j["lines"] = std::move(lines);
  j["sum_si_vp"] = r.severity.sum_si_vp;
  j["sum_si_lf"] = r.severity.sum_si_lf;
  j["ci"] = r.severity.ci;
  j["fvsi"] = r.fvsi;
  return j;
}

void emit_json(const RankingRun &run, const ReportContext &ctx, std::ostream &out) {
  ordered_json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["config"] = context_json(ctx);
  ordered_json scenarios = ordered_json::array();
  for (const auto &r : run.results) scenarios.push_back(scenario_json(r));
  doc["scenarios"] = std::move(scenarios);

  ordered_json rankings = ordered_json::array();
  for (const auto &t : run.tables) {
    ordered_json entries = ordered_json::array();
    for (const auto &e : t.entries) {
      entries.push_back({{"bus", e.bus_id},
                         {"ci", e.ci},
                         {"rank", e.rank},
                         {"tied", e.tied},
                         {"fvsi", e.fvsi},
                         {"fvsi_rank", e.fvsi_rank},
                         {"agrees", e.agrees}});
    }
    rankings.push_back({{"contingency", t.contingency.label}, {"entries", entries}, {"fvsi_order", t.fvsi_order}});
  }
  doc["rankings"] = std::move(rankings);

  const auto agreement = compare_with_fvsi(run.tables);
  doc["agreement"] = {{"matching_buses", agreement.matching_buses},
                      {"total_buses", agreement.total_buses},
                      {"identical_orders", agreement.identical_orders}};
  out << doc.dump(2) << '\n';
}

std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

void emit_csv(const RankingRun &run, std::ostream &out) {
  using text::format_double;
  out << "contingency,bus,q_critical_pu,sum_si_vp,sum_si_lf,ci,fvsi,rank_fuzzy,rank_fvsi\n";
  for (const auto &t : run.tables) {
    for (const auto &r : run.results) {
      if (!(r.scenario.contingency == t.contingency)) continue;
      out << csv_field(t.contingency.label) << ',' << r.scenario.bus_id << ',';
      const RankingEntry *e = r.ok() ? t.entry_for(r.scenario.bus_id) : nullptr;
      if (e == nullptr) {
        out << ",,,,,,\n";
        continue;
      }
      out << format_double(r.q_critical) << ',' << format_double(r.severity.sum_si_vp) << ','
          << format_double(r.severity.sum_si_lf) << ',' << format_double(r.severity.ci) << ','
          << format_double(r.fvsi) << ',' << e->rank << ',' << e->fvsi_rank << '\n';
    }
  }
}

void emit_human(const RankingRun &run, std::ostream &out) {
  out << "Critical bus ranking at maximum reactive load\n";
  for (const auto &t : run.tables) {
    out << "\nContingency: " << t.contingency.label << '\n';
    out << "  Bus   q_crit(pu)   sum SI_VP   sum SI_LF          CI  Rank       FVSI  Rank\n";
    for (const auto &e : t.entries) {
      const ScenarioResult *r = nullptr;
      for (const auto &cand : run.results) {
        if (cand.scenario.contingency == t.contingency && cand.scenario.bus_id == e.bus_id) r = &cand;
      }
      out << "  " << std::left << std::setw(4) << e.bus_id << std::right << std::fixed << std::setprecision(3)
          << std::setw(12) << r->q_critical << std::setw(12) << r->severity.sum_si_vp << std::setw(12)
          << r->severity.sum_si_lf << std::setw(12) << e.ci << "  " << std::left << std::setw(5)
          << (roman(e.rank) + (e.tied ? "=" : "")) << std::right << std::setw(9) << e.fvsi << "  " << roman(e.fvsi_rank)
          << '\n';
    }
    for (const auto &s : t.skipped) {
      out << "  " << std::left << std::setw(4) << s.scenario.bus_id << std::right << "skipped (" << to_string(s.status)
          << ")\n";
    }
    out << std::defaultfloat;
  }

  const auto agreement = compare_with_fvsi(run.tables);
  out << "\nFuzzy vs FVSI ranking\n";
  for (const auto &row : agreement.rows) {
    out << "  " << std::left << std::setw(10) << row.contingency << std::right << "  fuzzy:";
    for (int b : row.fuzzy_order) out << ' ' << b;
    out << "   fvsi:";
    for (int b : row.fvsi_order) out << ' ' << b;
    if (!row.disagreeing_buses.empty()) {
      out << "   differs at bus";
      for (int b : row.disagreeing_buses) out << ' ' << b;
    }
    out << '\n';
  }
  out << "  agreement: " << agreement.matching_buses << '/' << agreement.total_buses << " buses, "
      << agreement.identical_orders << '/' << agreement.rows.size() << " contingencies identical\n";
}

}  // namespace

void emit_report(const RankingRun &run, const ReportContext &context, ReportFormat format, std::ostream &out) {
  switch (format) {
    case ReportFormat::human:
      emit_human(run, out);
      break;
    case ReportFormat::csv:
      emit_csv(run, out);
      break;
    case ReportFormat::json:
      emit_json(run, context, out);
      break;
  }
}

void emit_report_file(const RankingRun &run, const ReportContext &context, ReportFormat format,
                      const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write report to " + path);
  emit_report(run, context, format, out);
  out.flush();
  if (!out) throw std::runtime_error("error writing report to " + path);
}

}  // namespace critbus
