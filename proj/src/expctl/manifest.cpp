#include "arvote/expctl/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <mutex>

#include <fmt/format.h>

#include "arvote/error.hpp"

namespace arvote {

namespace fs = std::filesystem;

namespace {

json optional_report(const std::optional<MetricReport>& r) { return r ? json(*r) : json(nullptr); }

std::optional<MetricReport> optional_report_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return metric_report_from_json(j.at(key));
}

std::mutex& writer_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void to_json(json& j, const ClassScores& c) {
  j = {{"label", c.label}, {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}};
}

void to_json(json& j, const MetricReport& r) {
  j = {{"model", r.model_name}, {"micro_f1", r.micro_f1}, {"macro_f1", r.macro_f1},
       {"accuracy", r.accuracy}, {"per_class", r.per_class}, {"n", r.n}};
}

void to_json(json& j, const VoteConfig& v) {
  j = {{"members", v.members}, {"tie_break", to_string(v.tie_break)}};
  j["anchor"] = v.anchor ? json(*v.anchor) : json(nullptr);
  j["positive_label"] = v.positive_label ? json(*v.positive_label) : json(nullptr);
}

void to_json(json& j, const RunManifest& m) {
  json members = json::array();
  for (const auto& r : m.members) {
    members.push_back({{"name", r.name},
                       {"backbone", r.backbone},
                       {"kind", to_string(r.kind)},
                       {"seed", r.seed},
                       {"cache_key", r.cache_key},
                       {"checkpoint_path", r.checkpoint_path},
                       {"checkpoint_digest", r.checkpoint_digest},
                       {"cache_hit", r.cache_hit},
                       {"selected_epoch", r.selected_epoch},
                       {"checkpoint_selection", r.checkpoint_selection},
                       {"history", r.history},
                       {"adapter", r.adapter},
                       {"dev_predictions", r.dev_predictions},
                       {"test_predictions", r.test_predictions},
                       {"dev_metrics", optional_report(r.dev_metrics)},
                       {"test_metrics", optional_report(r.test_metrics)}});
  }
  json ingest = json::object();
  for (const auto& [split, report] : m.ingest) ingest[split] = report;

  j = {{"tool_version", m.tool_version}, {"config_digest", m.config_digest}, {"config", m.config},
       {"task", m.task},                 {"seed", m.seed},                   {"run_label", m.run_label},
       {"run_dir", m.run_dir},           {"status", m.status},               {"started_at", m.started_at},
       {"finished_at", m.finished_at},   {"ingest", ingest},                 {"members", members},
       {"artifacts", m.artifacts}};
  j["failed_stage"] = m.failed_stage ? json(*m.failed_stage) : json(nullptr);
  j["error"] = m.error ? json(*m.error) : json(nullptr);
  if (m.ensemble) {
    const auto& e = *m.ensemble;
    j["ensemble"] = {{"vote", e.vote},
                     {"dev_predictions", e.dev_predictions},
                     {"test_predictions", e.test_predictions},
                     {"dev_agreement", e.dev_agreement},
                     {"dev_metrics", optional_report(e.dev_metrics)},
                     {"test_metrics", optional_report(e.test_metrics)}};
  } else {
    j["ensemble"] = nullptr;
  }
}

MetricReport metric_report_from_json(const json& j) {
  MetricReport r;
  r.model_name = j.value("model", "");
  r.micro_f1 = j.at("micro_f1").get<double>();
  r.macro_f1 = j.value("macro_f1", 0.0);
  r.accuracy = j.value("accuracy", r.micro_f1);
  r.n = j.value("n", std::size_t{0});
  if (j.contains("per_class")) {
    for (const auto& c : j.at("per_class")) {
      r.per_class.push_back({c.at("label").get<std::string>(), c.at("precision").get<double>(),
                             c.at("recall").get<double>(), c.at("f1").get<double>(),
                             c.value("support", std::size_t{0})});
    }
  }
  return r;
}

VoteConfig vote_config_from_json(const json& j) {
  VoteConfig v;
  v.members = j.at("members").get<std::vector<std::string>>();
  v.tie_break = parse_tie_break(j.at("tie_break").get<std::string>());
  if (j.contains("anchor") && !j.at("anchor").is_null()) v.anchor = j.at("anchor").get<std::string>();
  if (j.contains("positive_label") && !j.at("positive_label").is_null()) {
    v.positive_label = j.at("positive_label").get<std::string>();
  }
  return v;
}

RunManifest manifest_from_json(const json& j, const std::string& source) {
  RunManifest m;
  m.source = source;
  try {
    m.tool_version = j.value("tool_version", "");
    m.config_digest = j.value("config_digest", "");
    m.config = j.value("config", json::object());
    m.task = j.value("task", "");
    m.seed = j.value("seed", std::uint64_t{0});
    m.run_label = j.value("run_label", "");
    m.run_dir = j.value("run_dir", "");
    m.status = j.value("status", "partial");
    if (j.contains("failed_stage") && !j.at("failed_stage").is_null()) m.failed_stage = j.at("failed_stage").get<std::string>();
    if (j.contains("error") && !j.at("error").is_null()) m.error = j.at("error").get<std::string>();
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
    if (j.contains("ingest")) {
      for (const auto& [split, r] : j.at("ingest").items()) {
        IngestReport ir;
        ir.rows_read = r.at("rows_read").get<std::size_t>();
        ir.rows_dropped_null = r.at("rows_dropped_null").get<std::size_t>();
        ir.rows_dropped_dupe_id = r.at("rows_dropped_dupe_id").get<std::size_t>();
        ir.warnings = r.value("warnings", std::vector<std::string>{});
        m.ingest[split] = ir;
      }
    }
    for (const auto& r : j.value("members", json::array())) {
      MemberRecord rec;
      rec.name = r.at("name").get<std::string>();
      rec.backbone = r.value("backbone", rec.name);
      rec.kind = r.value("kind", "toy") == "toy" ? BackboneKind::kToy : BackboneKind::kExternal;
      rec.seed = r.value("seed", std::uint64_t{0});
      rec.cache_key = r.value("cache_key", "");
      rec.checkpoint_path = r.value("checkpoint_path", "");
      rec.checkpoint_digest = r.value("checkpoint_digest", "");
      rec.cache_hit = r.value("cache_hit", false);
      rec.selected_epoch = r.value("selected_epoch", 0);
      rec.checkpoint_selection = r.value("checkpoint_selection", "");
      for (const auto& h : r.value("history", json::array())) rec.history.push_back(epoch_record_from_json(h));
      rec.adapter = r.value("adapter", json());
      rec.dev_predictions = r.value("dev_predictions", "");
      rec.test_predictions = r.value("test_predictions", "");
      rec.dev_metrics = optional_report_from(r, "dev_metrics");
      rec.test_metrics = optional_report_from(r, "test_metrics");
      m.members.push_back(std::move(rec));
    }
    if (j.contains("ensemble") && !j.at("ensemble").is_null()) {
      const auto& e = j.at("ensemble");
      EnsembleRecord rec;
      if (e.contains("vote")) rec.vote = vote_config_from_json(e.at("vote"));
      rec.dev_predictions = e.value("dev_predictions", "");
      rec.test_predictions = e.value("test_predictions", "");
      rec.dev_agreement = e.value("dev_agreement", "");
      rec.dev_metrics = optional_report_from(e, "dev_metrics");
      rec.test_metrics = optional_report_from(e, "test_metrics");
      m.ensemble = std::move(rec);
    }
    m.artifacts = j.value("artifacts", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw DataError(fmt::format("manifest {}: {}", source, e.what()));
  }
  return m;
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read manifest " + path);
  json j;
  try {
    j = json::parse(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
  } catch (const json::exception& e) {
    throw DataError(fmt::format("manifest {}: {}", path, e.what()));
  }
  return manifest_from_json(j, path);
}

void write_manifest(const RunManifest& m, const std::string& path) {
  std::lock_guard lock(writer_mutex());
  if (fs::exists(path)) {
    std::ifstream in(path);
    json existing;
    try {
      in >> existing;
    } catch (const json::exception&) {
      existing = json::object();
    }
    if (existing.value("status", "") == "finalized") {
      throw EnvironmentError("refusing to overwrite finalized manifest " + path);
    }
  }
  if (m.status == "finalized") {
    for (const auto& a : m.artifacts) {
      if (!fs::exists(a)) throw EnvironmentError(fmt::format("manifest {} references missing artifact {}", path, a));
    }
  }
  const auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw EnvironmentError("cannot write manifest " + path);
    out << json(m).dump(2) << '\n';
    if (!out) throw EnvironmentError("failed writing manifest " + path);
  }
  fs::rename(tmp, path);
}

}  // namespace arvote
