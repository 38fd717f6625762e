#pragma once

#include <string>

#include "pcad/eval/protocol.hpp"

namespace pcad {

enum class ReportFormat { tsv, text };
ReportFormat parse_report_format(const std::string& text);

/// tsv: "# key=value" config lines, then one row per (category, metric) with
/// 4-decimal mean/std and full-precision columns. text: config header and one
/// line per category plus the average.
std::string format_report(const EvalReport& report, ReportFormat format);
void emit_report(const EvalReport& report, const std::string& path, ReportFormat format);

/// Parses the tsv layout back (metrics from the full-precision columns).
EvalReport parse_report_tsv(const std::string& text);

/// One line per ablation row (5 strategies, then 4 stages), averaged over
/// categories.
std::string format_ablation(const AblationReport& report, ReportFormat format);
void emit_ablation(const AblationReport& report, const std::string& path, ReportFormat format);

}  // namespace pcad
