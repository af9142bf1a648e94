#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "critbus/indices.h"
#include "critbus/stress.h"

namespace critbus::fuzzy {

/// Trapezoid a <= b <= c <= d; a == b or c == d make shoulders, b == c a triangle.
struct Trapezoid {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  bool operator==(const Trapezoid &) const = default;
};

struct MembershipFunction {
  std::string label;
  Trapezoid shape;

  double degree(double x) const;
  bool operator==(const MembershipFunction &) const = default;
};

/// Piecewise-linear trapezoid membership; 1 on [b, c], 0 outside [a, d].
double membership(const Trapezoid &t, double x);

/// Labeled terms over one crisp axis [lo, hi].
struct Partition {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<MembershipFunction> terms;

  const MembershipFunction *find(std::string_view label) const;
  bool operator==(const Partition &) const = default;
};

/// Single-antecedent rules: input term label -> output term label.
struct Rule {
  std::string input;
  std::string output;

  bool operator==(const Rule &) const = default;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FuzzyConfig {
  Partition voltage;   ///< LV, NV, OV
  Partition lf;        ///< VS, S, M, H, VH
  Partition severity;  ///< VLS, LS, BS, AS, MS
  std::vector<Rule> voltage_rules;
  std::vector<Rule> lf_rules;
  int grid_points = 1001;

  /// Uniform default partitions and the two severity rule rows.
  static FuzzyConfig defaults();

  /// Throws ConfigError on label mismatch, unordered breakpoints, dangling
  /// rules, or any axis point with zero membership in every term.
  void validate() const;

  bool operator==(const FuzzyConfig &) const = default;
};

FuzzyConfig parse_config(std::string_view text);
FuzzyConfig load_config_file(const std::string &path);
std::string serialize_config(const FuzzyConfig &config);

/**
 * Mamdani inference for one crisp input: min activation of each rule's
 * consequent, max aggregation, centroid over a fixed grid of the output axis.
 * The input is clamped to its partition's axis.
 */
double infer(const Partition &input, const std::vector<Rule> &rules, const Partition &output, int grid_points,
             double x);

double severity_voltage(double v, const FuzzyConfig &config);
double severity_lf(double lf, const FuzzyConfig &config);

struct BusSeverity {
  int bus_id = 0;
  double voltage = 0.0;
  double si = 0.0;
};

struct LineSeverity {
  std::string branch_id;
  double lf = 0.0;
  double si = 0.0;
};

struct SeverityResult {
  std::vector<BusSeverity> buses;  ///< every load bus, case order
  std::vector<LineSeverity> lines; ///< every in-service branch, case order
  double sum_si_vp = 0.0;
  double sum_si_lf = 0.0;
  double ci = 0.0;  ///< sum_si_vp + sum_si_lf
};

/// Order-independent sum: values are added in ascending order.
double canonical_sum(std::vector<double> values);

/// Severity of every load-bus voltage and every line index, summed into the Criticality Index.
SeverityResult criticality_index(const Case &c, const VoltageState &state, const std::vector<LineIndexRecord> &lines,
                                 const FuzzyConfig &config);

SeverityResult criticality_index(const Case &c, const CriticalLoadResult &critical, const FuzzyConfig &config,
                                 LfFormula formula = LfFormula::max_transfer);

}  // namespace critbus::fuzzy
