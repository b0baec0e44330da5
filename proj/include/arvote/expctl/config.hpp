#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arvote/corpus.hpp"
#include "arvote/ensemble.hpp"
#include "arvote/models.hpp"
#include "arvote/serialize.hpp"

namespace arvote {

struct DataPaths {
  std::string train;
  std::string dev;
  std::optional<std::string> test;
  DataFormat format = DataFormat::kTsv;
};

struct MemberConfig {
  /// Unique member name; also the prediction file stem.
  std::string name;
  BackboneSpec spec;
  TrainConfig train;
  /// False when train.seed was derived from the global seed.
  bool explicit_seed = false;
};

enum class FinalFit { kTrain, kTrainPlusDev };
std::string_view to_string(FinalFit f);

/// Experiment description. Paths are stored as given; relative paths are
/// resolved against `base_dir` (the config file's directory).
struct ExperimentConfig {
  Task task = Task::kTask1a;
  DataPaths data;
  CleanOptions preprocess;
  DuplicatePolicy duplicates = DuplicatePolicy::kDropWithWarning;
  std::vector<MemberConfig> members;
  VoteConfig vote;
  std::string output_dir;
  std::uint64_t seed = 0;
  FinalFit final_fit = FinalFit::kTrain;
  /// Submission files carry id and label only.
  bool strict = false;
  /// Shown next to the ensemble row in reports, e.g. "Post-evaluation".
  std::string run_label;
  std::string base_dir = ".";

  std::string resolve(const std::string& path) const;

  /// Fully resolved form (defaults filled, member seeds derived); serializing
  /// it with sorted keys gives the digest input.
  json canonical() const;
  std::string digest() const;
};

/// Parses a JSON experiment document. Member train seeds not given
/// explicitly are derived from the global seed and the member name.
ExperimentConfig parse_config(const json& doc, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

/// Re-derives implicit member seeds after the global seed changes.
void override_seed(ExperimentConfig& cfg, std::uint64_t seed);

/// Seed for a member without an explicit one.
std::uint64_t derive_member_seed(std::uint64_t global_seed, std::string_view member_name);

}  // namespace arvote
