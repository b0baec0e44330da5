#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arvote/ensemble.hpp"
#include "arvote/evalkit.hpp"
#include "arvote/serialize.hpp"

namespace arvote {

struct MemberRecord {
  std::string name;
  std::string backbone;
  BackboneKind kind = BackboneKind::kToy;
  std::uint64_t seed = 0;
  std::string cache_key;
  std::string checkpoint_path;
  std::string checkpoint_digest;
  bool cache_hit = false;
  int selected_epoch = 0;
  std::string checkpoint_selection;
  std::vector<EpochRecord> history;
  /// Runtime and checkpoint versions reported by the external adapter.
  json adapter;
  std::string dev_predictions;
  std::string test_predictions;
  std::optional<MetricReport> dev_metrics;
  std::optional<MetricReport> test_metrics;
};

struct EnsembleRecord {
  VoteConfig vote;
  std::string dev_predictions;
  std::string test_predictions;
  std::string dev_agreement;
  std::optional<MetricReport> dev_metrics;
  std::optional<MetricReport> test_metrics;
};

struct RunManifest {
  std::string tool_version;
  std::string config_digest;
  json config;
  std::string task;
  std::uint64_t seed = 0;
  std::string run_label;
  std::string run_dir;
  /// "partial" or "finalized".
  std::string status = "partial";
  std::optional<std::string> failed_stage;
  std::optional<std::string> error;
  std::string started_at;
  std::string finished_at;
  std::map<std::string, IngestReport> ingest;
  std::vector<MemberRecord> members;
  std::optional<EnsembleRecord> ensemble;
  std::vector<std::string> artifacts;

  /// Where the manifest was read from; not serialized.
  std::string source;
};

void to_json(json& j, const ClassScores& c);
void to_json(json& j, const MetricReport& r);
void to_json(json& j, const VoteConfig& v);
void to_json(json& j, const RunManifest& m);

MetricReport metric_report_from_json(const json& j);
VoteConfig vote_config_from_json(const json& j);
RunManifest manifest_from_json(const json& j, const std::string& source);

RunManifest read_manifest(const std::string& path);

/// Serialized writer. Refuses to overwrite a finalized manifest and, when
/// finalizing, checks that every referenced artifact exists.
void write_manifest(const RunManifest& m, const std::string& path);

}  // namespace arvote
