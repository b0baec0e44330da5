#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "arvote/corpus.hpp"
#include "arvote/digest.hpp"
#include "arvote/error.hpp"

namespace arvote {

namespace {

using json = nlohmann::json;

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      len = 2;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      len = 3;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xc0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    // overlong forms, surrogates, out of range
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) {
      return false;
    }
    i += len;
  }
  return true;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

Genre parse_genre(std::string_view s) {
  const auto v = lower(s);
  if (v == "tweet") return Genre::kTweet;
  if (v == "paragraph") return Genre::kParagraph;
  return Genre::kUnknown;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

// Accumulates rows, applying the null, duplicate and label rules in one place
// so TSV and JSONL agree exactly.
class Builder {
 public:
  Builder(std::string_view source, const LabelSpace& labelspace, Split split, const LoadOptions& options)
      : source_(source), options_(options) {
    result_.dataset.labelspace = labelspace;
    result_.dataset.split = split;
  }

  [[noreturn]] void fail(std::size_t line, const std::string& what) const {
    throw DataError(fmt::format("{}:{}: {}", source_, line, what));
  }

  void add(std::size_t line, std::string id, std::optional<std::string> text,
           std::optional<std::string> label, Genre genre) {
    ++result_.report.rows_read;
    if (id.empty()) fail(line, "empty id");
    if (!text || blank(*text)) {
      ++result_.report.rows_dropped_null;
      return;
    }
    if (!valid_utf8(*text) || !valid_utf8(id)) fail(line, "text is not valid UTF-8");
    if (label && blank(*label)) label.reset();

    Example e{std::move(id), std::move(*text), std::nullopt, genre};
    if (label) {
      try {
        e.label = normalize_label(*label, result_.dataset.labelspace);
      } catch (const DataError& err) {
        fail(line, err.what());
      }
    } else if (result_.dataset.split == Split::kTrain) {
      fail(line, "train split requires a label for id '" + e.id + "'");
    }

    if (!seen_.insert(e.id).second) {
      if (options_.duplicates == DuplicatePolicy::kError) fail(line, "duplicate id '" + e.id + "'");
      ++result_.report.rows_dropped_dupe_id;
      result_.report.warnings.push_back(
          fmt::format("{}:{}: duplicate id '{}' dropped (first occurrence kept)", source_, line, e.id));
      return;
    }
    result_.dataset.examples.push_back(std::move(e));
  }

  LoadResult finish(std::string digest) && {
    result_.dataset.provenance = {source_, std::move(digest)};
    return std::move(result_);
  }

 private:
  std::string source_;
  LoadOptions options_;
  LoadResult result_;
  std::unordered_set<std::string> seen_;
};

void parse_tsv(std::string_view contents, Builder& builder) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::optional<std::size_t> id_col, text_col, label_col, type_col;
  std::size_t columns = 0;

  while (pos < contents.size()) {
    auto nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    auto line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const auto fields = split_tabs(line);
    if (columns == 0) {
      columns = fields.size();
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const auto name = lower(fields[i]);
        if (name == "id") id_col = i;
        else if (name == "text") text_col = i;
        else if (name == "label") label_col = i;
        else if (name == "type") type_col = i;
      }
      if (!id_col || !text_col) builder.fail(line_no, "header must name at least the id and text columns");
      continue;
    }
    if (fields.size() != columns) {
      builder.fail(line_no, fmt::format("expected {} tab-separated fields, found {}", columns, fields.size()));
    }
    std::optional<std::string> label;
    if (label_col) label = std::string(fields[*label_col]);
    const Genre genre = type_col ? parse_genre(fields[*type_col]) : Genre::kUnknown;
    builder.add(line_no, std::string(fields[*id_col]), std::string(fields[*text_col]), std::move(label), genre);
  }
  if (columns == 0) builder.fail(1, "missing header row");
}

std::optional<std::string> json_string_field(const json& obj, const char* key, std::size_t line, Builder& builder) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_boolean()) return it->get<bool>() ? "true" : "false";
  if (it->is_number()) return it->dump();
  builder.fail(line, fmt::format("field '{}' must be a string", key));
}

void parse_jsonl(std::string_view contents, Builder& builder) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    auto nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    auto line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (blank(line)) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      builder.fail(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) builder.fail(line_no, "expected a JSON object");
    auto id = json_string_field(obj, "id", line_no, builder);
    if (!id) builder.fail(line_no, "missing id");
    auto text = json_string_field(obj, "text", line_no, builder);
    auto label = json_string_field(obj, "label", line_no, builder);
    auto type = json_string_field(obj, "type", line_no, builder);
    builder.add(line_no, std::move(*id), std::move(text), std::move(label),
                type ? parse_genre(*type) : Genre::kUnknown);
  }
}

}  // namespace

LoadResult parse_dataset(std::string_view contents, std::string_view source, DataFormat format,
                         const LabelSpace& labelspace, Split split, const LoadOptions& options) {
  const std::string digest = sha256_hex(contents);
  if (contents.substr(0, 3) == "\xEF\xBB\xBF") contents.remove_prefix(3);

  Builder builder(source, labelspace, split, options);
  if (format == DataFormat::kTsv) {
    parse_tsv(contents, builder);
  } else {
    parse_jsonl(contents, builder);
  }
  return std::move(builder).finish(digest);
}

LoadResult load_dataset(const std::string& path, DataFormat format, const LabelSpace& labelspace, Split split,
                        const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file: " + path);
  const std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_dataset(contents, path, format, labelspace, split, options);
}

std::string dataset_digest(const Dataset& d) {
  std::string buf;
  auto put = [&buf](std::string_view s) {
    buf += std::to_string(s.size());
    buf.push_back(':');
    buf.append(s);
  };
  put(to_string(d.labelspace.task()));
  put(to_string(d.split));
  for (const auto& e : d.examples) {
    put(e.id);
    put(e.text);
    put(e.label ? *e.label : std::string_view("\x01none"));
    put(to_string(e.genre));
  }
  return sha256_hex(buf);
}

}  // namespace arvote

namespace arvote {

void write_dataset_tsv(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EnvironmentError("cannot write " + path);
  out << "id\ttext\tlabel\ttype\n";
  for (const auto& e : d.examples) {
    std::string text = e.text;
    std::replace_if(text.begin(), text.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
    out << e.id << '\t' << text << '\t' << e.label.value_or("") << '\t' << to_string(e.genre) << '\n';
  }
  if (!out) throw EnvironmentError("failed writing " + path);
}

}  // namespace arvote
