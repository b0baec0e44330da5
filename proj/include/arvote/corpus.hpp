#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace arvote {

enum class Task { kTask1a, kTask2a };
enum class Split { kTrain, kDev, kTest };
enum class Genre { kTweet, kParagraph, kUnknown };
enum class DataFormat { kTsv, kJsonl };

std::string_view to_string(Task task);
std::string_view to_string(Split split);
std::string_view to_string(Genre genre);
std::string_view to_string(DataFormat format);
Task parse_task(std::string_view s);
Split parse_split(std::string_view s);
DataFormat parse_format(std::string_view s);

/// Closed binary label set of a task. Index 0 is always the positive class.
class LabelSpace {
 public:
  static LabelSpace for_task(Task task);

  Task task() const { return task_; }
  const std::array<std::string, 2>& labels() const { return labels_; }
  const std::string& positive() const { return labels_[0]; }
  const std::string& label(std::size_t index) const { return labels_.at(index); }

  /// Index of a canonical label, or nullopt if it is not in the space.
  std::optional<std::size_t> index_of(std::string_view label) const;
  bool contains(std::string_view label) const { return index_of(label).has_value(); }

  bool operator==(const LabelSpace&) const = default;

 private:
  LabelSpace(Task task, std::string positive, std::string negative)
      : task_(task), labels_{std::move(positive), std::move(negative)} {}

  Task task_;
  std::array<std::string, 2> labels_;
};

struct Example {
  std::string id;
  std::string text;
  std::optional<std::string> label;
  Genre genre = Genre::kUnknown;

  bool operator==(const Example&) const = default;
};

struct Provenance {
  std::string path;
  std::string sha256;
};

struct Dataset {
  std::vector<Example> examples;
  LabelSpace labelspace = LabelSpace::for_task(Task::kTask1a);
  Split split = Split::kTrain;
  Provenance provenance;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  bool fully_labeled() const;
};

/// Content digest over split, task and every example field in order.
std::string dataset_digest(const Dataset& d);

enum class DuplicatePolicy { kDropWithWarning, kError };

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped_null = 0;
  std::size_t rows_dropped_dupe_id = 0;
  std::vector<std::string> warnings;
};

struct LoadOptions {
  DuplicatePolicy duplicates = DuplicatePolicy::kDropWithWarning;
};

struct LoadResult {
  Dataset dataset;
  IngestReport report;
};

/// Reads a TSV or JSONL shared-task file. Rows with null or empty text are
/// dropped and counted; surviving rows keep their file order. Throws
/// DataError naming the line for malformed rows and unknown labels.
LoadResult load_dataset(const std::string& path, DataFormat format, const LabelSpace& labelspace,
                        Split split, const LoadOptions& options = {});

/// Same as load_dataset but from an in-memory buffer; `source` is used in
/// error messages and provenance.
LoadResult parse_dataset(std::string_view contents, std::string_view source, DataFormat format,
                         const LabelSpace& labelspace, Split split, const LoadOptions& options = {});

/// Writes `id<TAB>text<TAB>label<TAB>type`. Tabs and line breaks inside
/// text are replaced by spaces; absent labels are written as empty fields.
void write_dataset_tsv(const Dataset& d, const std::string& path);

/// Case-insensitive, trimmed match against the label space.
std::string normalize_label(std::string_view raw, const LabelSpace& labelspace);

enum class RtMode { kLeading, kAnywhere };
RtMode parse_rt_mode(std::string_view s);
std::string_view to_string(RtMode mode);

struct CleanOptions {
  RtMode strip_rt = RtMode::kLeading;
  /// Drop Arabic diacritics (U+064B..U+0652) and tatweel (U+0640).
  bool normalize_arabic = false;

  bool operator==(const CleanOptions&) const = default;
};

/// Removes the shared-task noise markers "@USER" and "LINK" wherever they
/// open a whitespace token (the marker must end the token or be followed by
/// ASCII punctuation, which is kept), drops "RT" when it is the leading token
/// (or every "RT" token with RtMode::kAnywhere), collapses whitespace runs
/// and trims. Total and idempotent.
std::string clean_text(std::string_view raw, const CleanOptions& options = {});

/// Applies clean_text to every example text.
Dataset clean_dataset(Dataset d, const CleanOptions& options = {});

struct SplitSummary {
  std::map<std::string, std::size_t> per_label;
  std::size_t unlabeled = 0;
  std::size_t total = 0;
};

/// Per-label counts. Both labels of the space always appear, possibly as 0.
SplitSummary split_summary(const Dataset& d);

}  // namespace arvote
