#pragma once

#include <ostream>
#include <string>
#include <string_view>

#include "critbus/ranking.h"

namespace critbus {

enum class ReportFormat { human, csv, json };

/// Parses "human", "csv" or "json"; throws std::invalid_argument otherwise.
ReportFormat parse_report_format(std::string_view name);

inline constexpr std::string_view kReportSchemaVersion = "critbus-report/1";

/// Settings echoed into JSON reports so a run can be reproduced from its output.
struct ReportContext {
  RankingOptions options;
  fuzzy::FuzzyConfig config;
  std::string case_source;
  std::string contingency_source;
};

void emit_report(const RankingRun &run, const ReportContext &context, ReportFormat format, std::ostream &out);

/// Writes to `path`; throws std::runtime_error when the file cannot be written.
void emit_report_file(const RankingRun &run, const ReportContext &context, ReportFormat format,
                      const std::string &path);

/// Upper-case Roman numeral for 1..3999, used by the human layout.
std::string roman(int value);

}  // namespace critbus
