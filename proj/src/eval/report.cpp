#include "pcad/eval/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pcad/error.hpp"

namespace pcad {

ReportFormat parse_report_format(const std::string& text) {
  if (text == "tsv") return ReportFormat::tsv;
  if (text == "text") return ReportFormat::text;
  fail_usage("unknown report format '" + text + "' (expected tsv or text)");
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string f4(double v) { return fmt("%.4f", v); }
std::string f17(double v) { return fmt("%.17g", v); }

std::string config_header(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : cfg.to_pairs()) out += "# " + k + "=" + v + "\n";
  return out;
}

void tsv_rows(std::string& out, const CategoryResult& cr) {
  auto line = [&](const std::string& metric, const Summary& s) {
    out += cr.category + "\t" + metric + "\t" + f4(s.mean) + "\t" + f4(s.std) + "\t" + f17(s.mean) + "\t" +
           f17(s.std) + "\t" + std::to_string(cr.runs) + "\n";
  };
  for (std::size_t m = 0; m < kMetricCount; ++m) line(kMetricNames[m], cr.metrics[m]);
  if (cr.silhouette) line("silhouette", *cr.silhouette);
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string pm(const Summary& s) { return f4(s.mean) + " +/- " + f4(s.std); }

void text_row(std::string& out, const CategoryResult& cr, std::size_t name_width, bool with_sil) {
  out += pad(cr.category, name_width);
  for (std::size_t m = 0; m < kMetricCount; ++m) out += "  " + pad(pm(cr.metrics[m]), 17);
  if (with_sil) out += "  " + (cr.silhouette ? pm(*cr.silhouette) : std::string("-"));
  out += "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_data("cannot open '" + path + "' for writing");
  out << text;
  if (!out) fail_data("write failed: '" + path + "'");
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    fail_data("report line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

std::string format_report(const EvalReport& report, ReportFormat format) {
  std::string out = config_header(report.cfg);
  if (format == ReportFormat::tsv) {
    out += "category\tmetric\tmean\tstd\tmean_exact\tstd_exact\truns\n";
    for (const auto& cr : report.categories) tsv_rows(out, cr);
    tsv_rows(out, report.average);
    return out;
  }
  std::size_t width = 8;
  for (const auto& cr : report.categories) width = std::max(width, cr.category.size());
  const bool with_sil = report.average.silhouette.has_value();
  out += "\n" + pad("category", width);
  for (const char* name : kMetricNames) out += "  " + pad(name, 17);
  if (with_sil) out += "  silhouette";
  out += "\n";
  for (const auto& cr : report.categories) text_row(out, cr, width, with_sil);
  text_row(out, report.average, width, with_sil);
  out += "runs per category: " + std::to_string(report.average.runs) + "\n";
  return out;
}

void emit_report(const EvalReport& report, const std::string& path, ReportFormat format) {
  write_text(path, format_report(report, format));
}

EvalReport parse_report_tsv(const std::string& text) {
  EvalReport rep;
  std::map<std::string, CategoryResult> cats;
  std::vector<std::string> order;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail_data("report line " + std::to_string(lineno) + ": bad config line");
      rep.cfg.set(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (!header) {
      if (line != "category\tmetric\tmean\tstd\tmean_exact\tstd_exact\truns")
        fail_data("report line " + std::to_string(lineno) + ": unexpected header");
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, '\t');) f.push_back(cell);
    if (f.size() != 7) fail_data("report line " + std::to_string(lineno) + ": expected 7 columns");
    if (!cats.count(f[0])) order.push_back(f[0]);
    CategoryResult& cr = cats[f[0]];
    cr.category = f[0];
    cr.runs = static_cast<std::size_t>(parse_double(f[6], lineno));
    const Summary s{parse_double(f[4], lineno), parse_double(f[5], lineno)};
    if (f[1] == "silhouette") {
      cr.silhouette = s;
      continue;
    }
    std::size_t m = 0;
    while (m < kMetricCount && f[1] != kMetricNames[m]) ++m;
    if (m == kMetricCount) fail_data("report line " + std::to_string(lineno) + ": unknown metric '" + f[1] + "'");
    cr.metrics[m] = s;
  }
  if (!header) fail_data("report has no header");
  for (const auto& name : order) {
    if (name == "average")
      rep.average = cats[name];
    else
      rep.categories.push_back(cats[name]);
  }
  return rep;
}

std::string format_ablation(const AblationReport& report, ReportFormat format) {
  std::string out = config_header(report.cfg);
  std::vector<const AblationRow*> rows;
  for (const auto& r : report.strategies) rows.push_back(&r);
  for (const auto& r : report.stages) rows.push_back(&r);
  if (format == ReportFormat::tsv) {
    out += "row\tsweep\tstage\tstrategy\truns";
    for (const char* name : kMetricNames) out += std::string("\t") + name + "_mean\t" + name + "_std";
    out += "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = *rows[i];
      out += r.name + "\t" + (i < report.strategies.size() ? "strategy" : "stage") + "\t" + to_string(r.stage) +
             "\t" + to_string(r.strategy) + "\t" + std::to_string(r.report.average.runs);
      for (const auto& s : r.report.average.metrics) out += "\t" + f17(s.mean) + "\t" + f17(s.std);
      out += "\n";
    }
    return out;
  }
  out += "\nrow  stage  strategy        ";
  for (const char* name : kMetricNames) out += "  " + pad(name, 17);
  out += "\n";
  for (const auto* r : rows) {
    out += pad(r->name, 5) + pad(to_string(r->stage), 7) + pad(to_string(r->strategy), 16);
    for (const auto& s : r->report.average.metrics) out += "  " + pad(pm(s), 17);
    out += "\n";
  }
  return out;
}

void emit_ablation(const AblationReport& report, const std::string& path, ReportFormat format) {
  write_text(path, format_ablation(report, format));
}

}  // namespace pcad
