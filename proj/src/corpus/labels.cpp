#include <algorithm>
#include <cctype>

#include "arvote/corpus.hpp"
#include "arvote/error.hpp"

namespace arvote {

namespace {

std::string lower_trimmed(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(Task task) { return task == Task::kTask1a ? "task1a" : "task2a"; }

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
  }
  return "?";
}

std::string_view to_string(Genre genre) {
  switch (genre) {
    case Genre::kTweet:
      return "tweet";
    case Genre::kParagraph:
      return "paragraph";
    case Genre::kUnknown:
      return "unknown";
  }
  return "?";
}

std::string_view to_string(DataFormat format) { return format == DataFormat::kTsv ? "tsv" : "jsonl"; }

Task parse_task(std::string_view s) {
  const auto v = lower_trimmed(s);
  if (v == "task1a") return Task::kTask1a;
  if (v == "task2a") return Task::kTask2a;
  throw ConfigError("unknown task '" + std::string(s) + "' (expected task1a or task2a)");
}

Split parse_split(std::string_view s) {
  const auto v = lower_trimmed(s);
  if (v == "train") return Split::kTrain;
  if (v == "dev") return Split::kDev;
  if (v == "test") return Split::kTest;
  throw ConfigError("unknown split '" + std::string(s) + "' (expected train, dev or test)");
}

DataFormat parse_format(std::string_view s) {
  const auto v = lower_trimmed(s);
  if (v == "tsv") return DataFormat::kTsv;
  if (v == "jsonl") return DataFormat::kJsonl;
  throw ConfigError("unknown data format '" + std::string(s) + "' (expected tsv or jsonl)");
}

RtMode parse_rt_mode(std::string_view s) {
  const auto v = lower_trimmed(s);
  if (v == "leading") return RtMode::kLeading;
  if (v == "anywhere") return RtMode::kAnywhere;
  throw ConfigError("unknown strip-rt mode '" + std::string(s) + "' (expected leading or anywhere)");
}

std::string_view to_string(RtMode mode) { return mode == RtMode::kLeading ? "leading" : "anywhere"; }

LabelSpace LabelSpace::for_task(Task task) {
  if (task == Task::kTask1a) return LabelSpace(task, "true", "false");
  return LabelSpace(task, "disinfo", "no-disinfo");
}

std::optional<std::size_t> LabelSpace::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return i;
  }
  return std::nullopt;
}

std::string normalize_label(std::string_view raw, const LabelSpace& labelspace) {
  const auto folded = lower_trimmed(raw);
  if (labelspace.contains(folded)) return folded;
  throw DataError("label '" + std::string(raw) + "' is not in the " +
                  std::string(to_string(labelspace.task())) + " label space {" +
                  labelspace.labels()[0] + ", " + labelspace.labels()[1] + "}");
}

bool Dataset::fully_labeled() const {
  return std::all_of(examples.begin(), examples.end(),
                     [](const Example& e) { return e.label.has_value(); });
}

SplitSummary split_summary(const Dataset& d) {
  SplitSummary s;
  for (const auto& label : d.labelspace.labels()) s.per_label[label] = 0;
  for (const auto& e : d.examples) {
    if (e.label) {
      ++s.per_label[*e.label];
    } else {
      ++s.unlabeled;
    }
  }
  s.total = d.examples.size();
  return s;
}

}  // namespace arvote
