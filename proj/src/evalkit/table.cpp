#include <algorithm>

#include <fmt/format.h>

#include "arvote/evalkit.hpp"

namespace arvote {

namespace {

// Display width in code points; good enough for the ASCII and Arabic names
// used here.
std::size_t width(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xc0) != 0x80;
  }));
}

std::string pad(std::string_view s, std::size_t w) {
  std::string out(s);
  out.append(w > width(s) ? w - width(s) : 0, ' ');
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string format_score(double score) { return fmt::format("{:.3f}", score); }

std::string render_text_table(const std::vector<TableRow>& rows, const std::string& score_header) {
  std::size_t name_w = width("Model");
  for (const auto& r : rows) name_w = std::max(name_w, width(r.model));
  const std::size_t score_w = std::max<std::size_t>(width(score_header), 5);

  std::string out = fmt::format("{} | {}\n", pad("Model", name_w), pad(score_header, score_w));
  out += std::string(name_w, '-') + "-+-" + std::string(score_w, '-') + "\n";
  for (const auto& r : rows) out += fmt::format("{} | {}\n", pad(r.model, name_w), format_score(r.score));
  return out;
}

std::string render_csv_table(const std::vector<TableRow>& rows, const std::string& score_header) {
  std::string out = fmt::format("model,{}\n", csv_field(score_header));
  for (const auto& r : rows) out += fmt::format("{},{}\n", csv_field(r.model), format_score(r.score));
  return out;
}

std::string render_metric_reports(const std::vector<MetricReport>& reports) {
  std::size_t name_w = width("model");
  for (const auto& r : reports) name_w = std::max(name_w, width(r.model_name));
  std::string out = fmt::format("{}  {:>8}  {:>8}  {:>8}  {:>6}\n", pad("model", name_w), "micro_f1", "macro_f1",
                                "accuracy", "n");
  for (const auto& r : reports) {
    out += fmt::format("{}  {:>8.4f}  {:>8.4f}  {:>8.4f}  {:>6}", pad(r.model_name, name_w), r.micro_f1, r.macro_f1,
                       r.accuracy, r.n);
    for (const auto& c : r.per_class) {
      out += fmt::format("  [{} P={:.4f} R={:.4f} F1={:.4f}]", c.label, c.precision, c.recall, c.f1);
    }
    out += '\n';
  }
  return out;
}

}  // namespace arvote
