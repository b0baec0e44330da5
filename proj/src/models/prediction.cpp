#include "arvote/prediction.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <filesystem>
#include <iterator>

#include <fmt/format.h>

#include "arvote/error.hpp"

namespace arvote {

void PredictionSet::add(Prediction p) {
  if (p.id.empty()) throw DataError("prediction with empty id");
  if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) {
    throw DataError(fmt::format("prediction for '{}' has confidence {} outside [0, 1]", p.id, p.confidence));
  }
  const auto [it, inserted] = index_.emplace(p.id, entries_.size());
  if (!inserted) throw DataError(fmt::format("duplicate prediction id '{}'", p.id));
  entries_.push_back(std::move(p));
}

const Prediction* PredictionSet::find(const std::string& id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

std::string format_predictions(const PredictionSet& ps, const PredictionFileOptions& options) {
  std::string out = options.strict ? "id\tlabel\n" : "id\tlabel\tconfidence\n";
  for (const auto& p : ps.entries()) {
    if (options.strict) {
      out += fmt::format("{}\t{}\n", p.id, p.label);
    } else {
      out += fmt::format("{}\t{}\t{:.6f}\n", p.id, p.label, p.confidence);
    }
  }
  return out;
}

void write_predictions(const PredictionSet& ps, const std::string& path, const PredictionFileOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EnvironmentError("cannot write predictions to " + path);
  out << format_predictions(ps, options);
  if (!out) throw EnvironmentError("failed writing predictions to " + path);
}

PredictionSet parse_predictions(std::string_view contents, std::string_view source,
                                const std::optional<LabelSpace>& labelspace) {
  auto fail = [&](std::size_t line, const std::string& what) {
    return DataError(fmt::format("{}:{}: {}", source, line, what));
  };
  PredictionSet ps;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  while (pos < contents.size()) {
    auto nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    auto line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    for (std::size_t start = 0;;) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }

    if (columns == 0) {
      if (fields.size() == 3 && fields[0] == "id" && fields[1] == "label" && fields[2] == "confidence") {
        columns = 3;
      } else if (fields.size() == 2 && fields[0] == "id" && fields[1] == "label") {
        columns = 2;
      } else {
        throw fail(line_no, "expected header 'id<TAB>label<TAB>confidence' or 'id<TAB>label'");
      }
      continue;
    }
    if (fields.size() != columns) {
      throw fail(line_no, fmt::format("expected {} fields, found {}", columns, fields.size()));
    }
    Prediction p{std::string(fields[0]), std::string(fields[1]), 1.0};
    if (labelspace && !labelspace->contains(p.label)) {
      throw fail(line_no, fmt::format("label '{}' is not in the {} label space", p.label, to_string(labelspace->task())));
    }
    if (columns == 3) {
      const auto text = fields[2];
      const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), p.confidence);
      if (ec != std::errc{} || end != text.data() + text.size()) {
        throw fail(line_no, fmt::format("malformed confidence '{}'", text));
      }
    }
    try {
      ps.add(std::move(p));
    } catch (const DataError& e) {
      throw fail(line_no, e.what());
    }
  }
  if (columns == 0) throw fail(1, "missing header row");
  return ps;
}

PredictionSet read_predictions(const std::string& path, const std::optional<LabelSpace>& labelspace) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open prediction file " + path);
  const std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto ps = parse_predictions(contents, path, labelspace);
  ps.set_model_name(std::filesystem::path(path).stem().string());
  return ps;
}

}  // namespace arvote
