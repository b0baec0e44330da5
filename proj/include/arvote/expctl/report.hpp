#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arvote/evalkit.hpp"
#include "arvote/expctl/manifest.hpp"

namespace arvote {

enum class ReportStyle { kDevTable, kTestTable };
ReportStyle parse_report_style(std::string_view s);

/// Member rows (first occurrence of each name across manifests) followed by
/// one "Ensemble - Hard Voting" row per manifest, labelled with the run
/// label when present. Throws DataError naming the manifest when the split's
/// metrics are missing.
std::vector<TableRow> report_rows(std::span<const RunManifest> manifests, ReportStyle style);

enum class TableFormat { kText, kCsv };

std::string emit_report(std::span<const RunManifest> manifests, ReportStyle style,
                        TableFormat format = TableFormat::kText);

}  // namespace arvote
