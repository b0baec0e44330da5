#include "arvote/expctl/report.hpp"

#include <set>

#include <fmt/format.h>

#include "arvote/error.hpp"

namespace arvote {

ReportStyle parse_report_style(std::string_view s) {
  if (s == "dev_table") return ReportStyle::kDevTable;
  if (s == "test_table") return ReportStyle::kTestTable;
  throw ConfigError(fmt::format("unknown report style '{}' (expected dev_table or test_table)", s));
}

std::vector<TableRow> report_rows(std::span<const RunManifest> manifests, ReportStyle style) {
  if (manifests.empty()) throw ConfigError("report needs at least one manifest");
  const bool dev = style == ReportStyle::kDevTable;
  const char* split = dev ? "dev" : "test";
  auto where = [](const RunManifest& m) { return m.source.empty() ? m.run_dir : m.source; };

  std::vector<TableRow> rows;
  std::set<std::string> seen;
  for (const auto& m : manifests) {
    for (const auto& member : m.members) {
      const auto& metrics = dev ? member.dev_metrics : member.test_metrics;
      if (!metrics) {
        throw DataError(fmt::format("manifest {}: member '{}' has no {} metrics", where(m), member.name, split));
      }
      if (seen.insert(member.name).second) rows.push_back({member.name, metrics->micro_f1});
    }
  }
  for (const auto& m : manifests) {
    if (!m.ensemble) throw DataError(fmt::format("manifest {}: no ensemble record", where(m)));
    const auto& metrics = dev ? m.ensemble->dev_metrics : m.ensemble->test_metrics;
    if (!metrics) throw DataError(fmt::format("manifest {}: ensemble has no {} metrics", where(m), split));
    std::string name = "Ensemble - Hard Voting";
    if (!m.run_label.empty()) name += " (" + m.run_label + ")";
    rows.push_back({name, metrics->micro_f1});
  }
  return rows;
}

std::string emit_report(std::span<const RunManifest> manifests, ReportStyle style, TableFormat format) {
  const auto rows = report_rows(manifests, style);
  return format == TableFormat::kCsv ? render_csv_table(rows) : render_text_table(rows);
}

}  // namespace arvote
