#include "critbus/fuzzy.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "critbus/text_util.h"

namespace critbus::fuzzy {

double membership(const Trapezoid &t, double x) {
  if (x < t.a || x > t.d) return 0.0;
  if (x >= t.b && x <= t.c) return 1.0;
  if (x < t.b) return (x - t.a) / (t.b - t.a);
  return (t.d - x) / (t.d - t.c);
}

double MembershipFunction::degree(double x) const { return membership(shape, x); }

const MembershipFunction *Partition::find(std::string_view label) const {
  for (const auto &t : terms) {
    if (t.label == label) return &t;
  }
  return nullptr;
}

namespace {

Partition uniform_partition(double lo, double hi, double first_center, double spacing,
                            std::initializer_list<const char *> labels) {
  // plateau +-spacing/4, feet +-3*spacing/4; neighbours cross at 0.5; end terms are shoulders
  Partition p{lo, hi, {}};
  const std::size_t n = labels.size();
  std::size_t k = 0;
  for (const char *label : labels) {
    const double center = first_center + spacing * static_cast<double>(k);
    Trapezoid t{center - 0.75 * spacing, center - 0.25 * spacing, center + 0.25 * spacing, center + 0.75 * spacing};
    if (k == 0) t.a = t.b = lo;
    if (k + 1 == n) t.c = t.d = hi;
    p.terms.push_back({label, t});
    ++k;
  }
  return p;
}

constexpr std::array<const char *, 3> kVoltageLabels{"LV", "NV", "OV"};
constexpr std::array<const char *, 5> kLfLabels{"VS", "S", "M", "H", "VH"};
constexpr std::array<const char *, 5> kSeverityLabels{"VLS", "LS", "BS", "AS", "MS"};

template <std::size_t N>
void check_labels(const Partition &p, const std::array<const char *, N> &expected, const char *name) {
  if (p.terms.size() != N) {
    throw ConfigError(std::string(name) + " partition needs " + std::to_string(N) + " terms");
  }
  for (std::size_t i = 0; i < N; ++i) {
    if (p.terms[i].label != expected[i]) {
      throw ConfigError(std::string(name) + " term " + std::to_string(i) + " must be " + expected[i] + ", got " +
                        p.terms[i].label);
    }
  }
}

void check_partition(const Partition &p, const char *name) {
  if (!(p.lo < p.hi) || !std::isfinite(p.lo) || !std::isfinite(p.hi)) {
    throw ConfigError(std::string(name) + " axis must satisfy lo < hi");
  }
  for (const auto &mf : p.terms) {
    const auto &t = mf.shape;
    if (!(t.a <= t.b && t.b <= t.c && t.c <= t.d) || !std::isfinite(t.a) || !std::isfinite(t.d)) {
      throw ConfigError(std::string(name) + " term " + mf.label + ": breakpoints must be ordered");
    }
  }
  // coverage: dense grid plus every breakpoint inside the axis
  std::vector<double> probes;
  constexpr int kProbes = 20001;
  for (int i = 0; i < kProbes; ++i) probes.push_back(p.lo + (p.hi - p.lo) * i / (kProbes - 1));
  for (const auto &mf : p.terms) {
    for (double x : {mf.shape.a, mf.shape.b, mf.shape.c, mf.shape.d}) {
      if (x >= p.lo && x <= p.hi) probes.push_back(x);
    }
  }
  for (double x : probes) {
    double best = 0.0;
    for (const auto &mf : p.terms) best = std::max(best, mf.degree(x));
    if (!(best > 0.0)) {
      throw ConfigError(std::string(name) + " partition leaves " + text::format_double(x) + " uncovered");
    }
  }
}

void check_rules(const std::vector<Rule> &rules, const Partition &input, const Partition &output, const char *name) {
  for (const auto &mf : input.terms) {
    auto n = std::count_if(rules.begin(), rules.end(), [&](const Rule &r) { return r.input == mf.label; });
    if (n != 1) throw ConfigError(std::string(name) + " rules need exactly one rule for " + mf.label);
  }
  for (const auto &r : rules) {
    if (input.find(r.input) == nullptr) throw ConfigError(std::string(name) + " rule on unknown term " + r.input);
    if (output.find(r.output) == nullptr) throw ConfigError(std::string(name) + " rule to unknown term " + r.output);
  }
}

}  // namespace

FuzzyConfig FuzzyConfig::defaults() {
  FuzzyConfig cfg;
  cfg.voltage = Partition{0.5,
                          1.1,
                          {{"LV", {0.5, 0.5, 0.80, 0.95}},
                           {"NV", {0.90, 0.98, 1.02, 1.05}},
                           {"OV", {1.02, 1.05, 1.1, 1.1}}}};
  cfg.lf = uniform_partition(0.0, 1.2, 0.0, 0.25, {"VS", "S", "M", "H", "VH"});
  cfg.severity = uniform_partition(0.0, 100.0, 10.0, 20.0, {"VLS", "LS", "BS", "AS", "MS"});
  cfg.voltage_rules = {{"LV", "MS"}, {"NV", "BS"}, {"OV", "MS"}};
  cfg.lf_rules = {{"VS", "VLS"}, {"S", "LS"}, {"M", "BS"}, {"H", "AS"}, {"VH", "MS"}};
  cfg.grid_points = 1001;
  return cfg;
}

void FuzzyConfig::validate() const {
  check_labels(voltage, kVoltageLabels, "voltage");
  check_labels(lf, kLfLabels, "lf");
  check_labels(severity, kSeverityLabels, "severity");
  check_partition(voltage, "voltage");
  check_partition(lf, "lf");
  check_partition(severity, "severity");
  check_rules(voltage_rules, voltage, severity, "voltage");
  check_rules(lf_rules, lf, severity, "lf");
  if (grid_points < 2) throw ConfigError("grid needs at least 2 points");

  // every consequent must have area on the output grid, or a clipped shape could vanish
  for (const auto &mf : severity.terms) {
    bool any = false;
    for (int i = 0; i < grid_points && !any; ++i) {
      any = mf.degree(severity.lo + (severity.hi - severity.lo) * i / (grid_points - 1)) > 0.0;
    }
    if (!any) throw ConfigError("severity term " + mf.label + " has no support on the output grid");
  }
}

double infer(const Partition &input, const std::vector<Rule> &rules, const Partition &output, int grid_points,
             double x) {
  x = std::clamp(x, input.lo, input.hi);

  struct Active {
    const MembershipFunction *consequent;
    double strength;
  };
  std::vector<Active> active;
  for (const auto &rule : rules) {
    const double strength = std::min(1.0, input.find(rule.input)->degree(x));
    if (strength > 0.0) active.push_back({output.find(rule.output), strength});
  }

  double area = 0.0;
  double moment = 0.0;
  const double span = output.hi - output.lo;
  for (int i = 0; i < grid_points; ++i) {
    const double y = output.lo + span * i / (grid_points - 1);
    double mu = 0.0;
    for (const auto &a : active) mu = std::max(mu, std::min(a.strength, a.consequent->degree(y)));
    if (i == 0 || i == grid_points - 1) mu *= 0.5;
    area += mu;
    moment += mu * y;
  }
  if (!(area > 0.0)) throw ConfigError("empty aggregate output at input " + text::format_double(x));
  return moment / area;
}

double severity_voltage(double v, const FuzzyConfig &config) {
  return infer(config.voltage, config.voltage_rules, config.severity, config.grid_points, v);
}

double severity_lf(double lf, const FuzzyConfig &config) {
  return infer(config.lf, config.lf_rules, config.severity, config.grid_points, lf);
}

double canonical_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

SeverityResult criticality_index(const Case &c, const VoltageState &state, const std::vector<LineIndexRecord> &lines,
                                 const FuzzyConfig &config) {
  SeverityResult out;
  std::vector<double> vp, lf;
  for (std::size_t i = 0; i < c.bus_count(); ++i) {
    const auto &bus = c.buses()[i];
    if (bus.kind != BusKind::load) continue;
    const double v = state.magnitude(static_cast<Eigen::Index>(i));
    const double si = severity_voltage(v, config);
    out.buses.push_back({bus.id, v, si});
    vp.push_back(si);
  }
  for (const auto &rec : lines) {
    const double si = severity_lf(rec.lf, config);
    out.lines.push_back({rec.branch_id, rec.lf, si});
    lf.push_back(si);
  }
  out.sum_si_vp = canonical_sum(std::move(vp));
  out.sum_si_lf = canonical_sum(std::move(lf));
  out.ci = out.sum_si_vp + out.sum_si_lf;
  return out;
}

SeverityResult criticality_index(const Case &c, const CriticalLoadResult &critical, const FuzzyConfig &config,
                                 LfFormula formula) {
  const auto records =
      line_indices(c, critical.contingency.branches, critical.solution.voltage, critical.flows, formula);
  return criticality_index(c, critical.solution.voltage, records, config);
}

// ---- config file ---------------------------------------------------------

namespace {

Partition *partition_by_name(FuzzyConfig &cfg, std::string_view name) {
  if (name == "voltage") return &cfg.voltage;
  if (name == "lf") return &cfg.lf;
  if (name == "severity") return &cfg.severity;
  return nullptr;
}

}  // namespace

FuzzyConfig parse_config(std::string_view text) {
  FuzzyConfig cfg;
  cfg.voltage = cfg.lf = cfg.severity = Partition{};
  bool axis_seen[3] = {false, false, false};
  auto lines = text::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string where = "fuzzy config line " + std::to_string(n + 1) + ": ";
    auto tok = text::tokenize(lines[n]);
    if (tok.empty()) continue;
    auto num = [&](std::string_view t) {
      auto v = text::parse_double(t);
      if (!v) throw ConfigError(where + "bad number '" + std::string(t) + "'");
      return *v;
    };
    if (tok[0] == "GRID" && tok.size() == 2) {
      auto g = text::parse_int(tok[1]);
      if (!g) throw ConfigError(where + "bad grid size");
      cfg.grid_points = *g;
    } else if (tok[0] == "AXIS" && tok.size() == 4) {
      Partition *p = partition_by_name(cfg, tok[1]);
      if (p == nullptr) throw ConfigError(where + "unknown axis " + std::string(tok[1]));
      p->lo = num(tok[2]);
      p->hi = num(tok[3]);
      axis_seen[p == &cfg.voltage ? 0 : p == &cfg.lf ? 1 : 2] = true;
    } else if (tok[0] == "TERM" && tok.size() == 7) {
      Partition *p = partition_by_name(cfg, tok[1]);
      if (p == nullptr) throw ConfigError(where + "unknown axis " + std::string(tok[1]));
      p->terms.push_back({std::string(tok[2]), {num(tok[3]), num(tok[4]), num(tok[5]), num(tok[6])}});
    } else if (tok[0] == "RULE" && tok.size() == 4) {
      Rule r{std::string(tok[2]), std::string(tok[3])};
      if (tok[1] == "voltage") {
        cfg.voltage_rules.push_back(std::move(r));
      } else if (tok[1] == "lf") {
        cfg.lf_rules.push_back(std::move(r));
      } else {
        throw ConfigError(where + "rules apply to voltage or lf, not " + std::string(tok[1]));
      }
    } else {
      throw ConfigError(where + "unrecognised record");
    }
  }
  for (int i = 0; i < 3; ++i) {
    if (!axis_seen[i]) throw ConfigError("fuzzy config: missing AXIS for " + std::string(i == 0 ? "voltage" : i == 1 ? "lf" : "severity"));
  }
  cfg.validate();
  return cfg;
}

FuzzyConfig load_config_file(const std::string &path) {
  std::string body;
  try {
    body = text::read_file(path);
  } catch (const std::runtime_error &e) {
    throw ConfigError(e.what());
  }
  return parse_config(body);
}

std::string serialize_config(const FuzzyConfig &config) {
  using text::format_double;
  std::ostringstream out;
  out << "GRID " << config.grid_points << '\n';
  auto write_partition = [&](const char *name, const Partition &p) {
    out << "\nAXIS " << name << ' ' << format_double(p.lo) << ' ' << format_double(p.hi) << '\n';
    for (const auto &mf : p.terms) {
      out << "TERM " << name << ' ' << mf.label << ' ' << format_double(mf.shape.a) << ' ' << format_double(mf.shape.b)
          << ' ' << format_double(mf.shape.c) << ' ' << format_double(mf.shape.d) << '\n';
    }
  };
  write_partition("voltage", config.voltage);
  write_partition("lf", config.lf);
  write_partition("severity", config.severity);
  out << '\n';
  for (const auto &r : config.voltage_rules) out << "RULE voltage " << r.input << ' ' << r.output << '\n';
  for (const auto &r : config.lf_rules) out << "RULE lf " << r.input << ' ' << r.output << '\n';
  return out.str();
}

}  // namespace critbus::fuzzy
