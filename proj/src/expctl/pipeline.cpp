#include "arvote/expctl/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "arvote/digest.hpp"
#include "arvote/error.hpp"
#include "arvote/version.hpp"

namespace arvote {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path allocate_run_dir(const fs::path& runs) {
  fs::create_directories(runs);
  for (int i = 1; i < 100000; ++i) {
    const auto dir = runs / fmt::format("{:04d}", i);
    if (fs::create_directory(dir)) return dir;
  }
  throw EnvironmentError("no free run directory under " + runs.string());
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw EnvironmentError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw EnvironmentError("failed writing " + path.string());
}

json agreement_json(const AgreementReport& r) {
  json histograms = json::array();
  for (const auto& [id, h] : r.histograms) histograms.push_back({{"id", id}, {"votes", h}});
  return {{"members", r.members},
          {"unanimous", r.unanimous},
          {"ties", r.ties},
          {"pairwise", r.pairwise},
          {"histograms", histograms}};
}

bool has_gold(const std::optional<Dataset>& d) { return d && !d->empty() && d->fully_labeled(); }

struct TrainedMember {
  FittedModel model;
  bool cache_hit = false;
  std::string cache_key;
  std::string checkpoint_path;
};

}  // namespace

std::string member_cache_key(const MemberConfig& member, FinalFit final_fit, const std::string& train_digest,
                             const std::string& dev_digest) {
  const json key = {{"name", member.name},
                    {"spec", member.spec},
                    {"train", member.train},
                    {"final_fit", to_string(final_fit)},
                    {"train_data", train_digest},
                    {"dev_data", dev_digest},
                    {"format_version", kCheckpointVersion}};
  return sha256_hex(key.dump()).substr(0, 24);
}

void validate_experiment(const ExperimentConfig& cfg) {
  if (cfg.members.empty()) throw ConfigError("experiment has no members");
  std::set<std::string> names;
  for (const auto& m : cfg.members) {
    m.spec.validate();
    m.train.validate();
    if (!names.insert(m.name).second) throw ConfigError("duplicate member name '" + m.name + "'");
  }
  for (const auto& v : cfg.vote.members) {
    if (!names.count(v)) throw ConfigError("vote member '" + v + "' is not a configured member");
  }
  VoteConfig probe = cfg.vote;
  if (probe.tie_break == TieBreak::kAnchorModel && !probe.anchor) probe.anchor = probe.members.front();
  probe.validate();

  auto require_file = [&](const std::string& role, const std::string& path) {
    const auto resolved = cfg.resolve(path);
    if (!fs::is_regular_file(resolved)) throw ConfigError(fmt::format("{} data file not found: {}", role, resolved));
  };
  require_file("train", cfg.data.train);
  require_file("dev", cfg.data.dev);
  if (cfg.data.test) require_file("test", *cfg.data.test);
  if (cfg.output_dir.empty()) throw ConfigError("output_dir must be set");
}

RunManifest run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  validate_experiment(cfg);

  const fs::path out_dir = cfg.resolve(cfg.output_dir);
  const fs::path run_dir = allocate_run_dir(out_dir / "runs");
  const fs::path pred_dir = run_dir / "predictions";
  fs::create_directories(pred_dir);
  fs::create_directories(out_dir / "cache");
  const std::string manifest_path = (run_dir / "manifest.json").string();

  const LabelSpace labelspace = LabelSpace::for_task(cfg.task);
  RunManifest m;
  m.tool_version = kToolVersion;
  m.config = cfg.canonical();
  m.config_digest = cfg.digest();
  m.task = std::string(to_string(cfg.task));
  m.seed = cfg.seed;
  m.run_label = cfg.run_label;
  m.run_dir = run_dir.string();
  m.started_at = utc_now();

  std::string stage = "ingest";
  try {
    const LoadOptions load_options{cfg.duplicates};
    auto ingest = [&](const std::string& path, Split split) {
      auto loaded = load_dataset(cfg.resolve(path), cfg.data.format, labelspace, split, load_options);
      for (const auto& w : loaded.report.warnings) spdlog::warn(w);
      m.ingest[std::string(to_string(split))] = loaded.report;
      return clean_dataset(std::move(loaded.dataset), cfg.preprocess);
    };
    const Dataset train_set = ingest(cfg.data.train, Split::kTrain);
    const Dataset dev_set = ingest(cfg.data.dev, Split::kDev);
    std::optional<Dataset> test_set;
    if (cfg.data.test) test_set = ingest(*cfg.data.test, Split::kTest);
    if (dev_set.empty()) throw DataError("dev set is empty after ingestion");
    if (!dev_set.fully_labeled()) throw DataError("dev set must be fully labeled");
    {
      json reports = json::object();
      for (const auto& [split, r] : m.ingest) reports[split] = r;
      const auto path = run_dir / "ingest.json";
      write_json(reports, path);
      m.artifacts.push_back(path.string());
    }

    stage = "train";
    Dataset fit_set = train_set;
    if (cfg.final_fit == FinalFit::kTrainPlusDev) {
      std::set<std::string> ids;
      for (const auto& e : fit_set.examples) ids.insert(e.id);
      for (const auto& e : dev_set.examples) {
        if (!ids.insert(e.id).second) throw DataError("id '" + e.id + "' appears in both train and dev");
        fit_set.examples.push_back(e);
      }
    }
    const auto fit_digest = dataset_digest(fit_set);
    const auto dev_digest = dataset_digest(dev_set);

    auto train_member = [&](const MemberConfig& member) {
      TrainedMember t;
      t.cache_key = member_cache_key(member, cfg.final_fit, fit_digest, dev_digest);
      const fs::path cache_dir = out_dir / "cache" / t.cache_key;
      t.checkpoint_path = (cache_dir / "model.json").string();
      if (!options.force && fs::exists(t.checkpoint_path)) {
        t.model = load_model(t.checkpoint_path);
        t.cache_hit = true;
        spdlog::info("member '{}': reusing cached checkpoint {}", member.name, t.checkpoint_path);
        return t;
      }
      fs::create_directories(cache_dir);
      spdlog::info("member '{}': training {} backbone '{}'", member.name, to_string(member.spec.kind),
                   member.spec.name);
      if (member.spec.kind == BackboneKind::kToy) {
        t.model = train(member.spec, fit_set, dev_set, member.train);
      } else {
        t.model = fine_tune_external(member.spec, fit_set, dev_set, member.train, cache_dir / "external");
      }
      t.model.name = member.name;
      t.model.preprocess = cfg.preprocess;
      save_model(t.model, t.checkpoint_path);
      return t;
    };

    std::vector<TrainedMember> trained;
    if (options.parallel && cfg.members.size() > 1) {
      std::vector<std::future<TrainedMember>> jobs;
      for (const auto& member : cfg.members) jobs.push_back(std::async(std::launch::async, train_member, std::cref(member)));
      for (auto& job : jobs) trained.push_back(job.get());
    } else {
      for (const auto& member : cfg.members) trained.push_back(train_member(member));
    }

    stage = "predict";
    const PredictionFileOptions test_file_options{cfg.strict};
    std::vector<PredictionSet> dev_preds, test_preds;
    for (std::size_t i = 0; i < trained.size(); ++i) {
      const auto& t = trained[i];
      MemberRecord rec;
      rec.name = cfg.members[i].name;
      rec.backbone = cfg.members[i].spec.name;
      rec.kind = cfg.members[i].spec.kind;
      rec.seed = cfg.members[i].train.seed;
      rec.cache_key = t.cache_key;
      rec.checkpoint_path = t.checkpoint_path;
      rec.checkpoint_digest = model_digest(t.model);
      rec.cache_hit = t.cache_hit;
      rec.selected_epoch = t.model.selected_epoch;
      rec.checkpoint_selection = std::string(to_string(t.model.train_config.selection));
      rec.history = t.model.history;
      if (const auto* h = std::get_if<ExternalHandle>(&t.model.weights)) {
        rec.adapter = {{"runtime", h->runtime},
                       {"runtime_version", h->runtime_version},
                       {"checkpoint", t.model.spec.checkpoint},
                       {"checkpoint_version", h->checkpoint_version}};
      }
      m.artifacts.push_back(t.checkpoint_path);

      dev_preds.push_back(predict(t.model, dev_set));
      rec.dev_predictions = (pred_dir / (rec.name + ".dev.tsv")).string();
      write_predictions(dev_preds.back(), rec.dev_predictions);
      m.artifacts.push_back(rec.dev_predictions);
      if (test_set) {
        test_preds.push_back(predict(t.model, *test_set));
        rec.test_predictions = (pred_dir / (rec.name + ".test.tsv")).string();
        write_predictions(test_preds.back(), rec.test_predictions, test_file_options);
        m.artifacts.push_back(rec.test_predictions);
      }
      m.members.push_back(std::move(rec));
    }

    stage = "vote";
    auto member_index = [&](const std::string& name) {
      for (std::size_t i = 0; i < cfg.members.size(); ++i) {
        if (cfg.members[i].name == name) return i;
      }
      throw ConfigError("unknown vote member '" + name + "'");
    };
    EnsembleRecord ens;
    ens.vote = cfg.vote;
    if (ens.vote.tie_break == TieBreak::kAnchorModel && !ens.vote.anchor) {
      double best = -1.0;
      for (const auto& name : ens.vote.members) {
        const double f1 = micro_f1(confusion(dev_set, dev_preds[member_index(name)]));
        if (f1 > best) {
          best = f1;
          ens.vote.anchor = name;
        }
      }
      spdlog::info("tie-break anchor: '{}' (dev micro F1 {:.4f})", *ens.vote.anchor, best);
    }
    std::vector<PredictionSet> dev_voters, test_voters;
    for (const auto& name : ens.vote.members) {
      dev_voters.push_back(dev_preds[member_index(name)]);
      if (test_set) test_voters.push_back(test_preds[member_index(name)]);
    }
    const auto dev_ensemble = hard_vote(dev_voters, ens.vote);
    ens.dev_predictions = (pred_dir / "ensemble.dev.tsv").string();
    write_predictions(dev_ensemble, ens.dev_predictions);
    m.artifacts.push_back(ens.dev_predictions);
    ens.dev_agreement = (run_dir / "agreement.dev.json").string();
    write_json(agreement_json(agreement_stats(dev_voters)), ens.dev_agreement);
    m.artifacts.push_back(ens.dev_agreement);
    std::optional<PredictionSet> test_ensemble;
    if (test_set) {
      test_ensemble = hard_vote(test_voters, ens.vote);
      ens.test_predictions = (pred_dir / "ensemble.test.tsv").string();
      write_predictions(*test_ensemble, ens.test_predictions, test_file_options);
      m.artifacts.push_back(ens.test_predictions);
    }

    stage = "eval";
    const bool test_gold = has_gold(test_set);
    for (std::size_t i = 0; i < m.members.size(); ++i) {
      m.members[i].dev_metrics = metric_report(confusion(dev_set, dev_preds[i]), m.members[i].name);
      if (test_gold) m.members[i].test_metrics = metric_report(confusion(*test_set, test_preds[i]), m.members[i].name);
    }
    ens.dev_metrics = metric_report(confusion(dev_set, dev_ensemble), "ensemble");
    if (test_gold) ens.test_metrics = metric_report(confusion(*test_set, *test_ensemble), "ensemble");
    m.ensemble = std::move(ens);

    stage = "finalize";
    m.status = "finalized";
    m.finished_at = utc_now();
    write_manifest(m, manifest_path);
  } catch (const Error& e) {
    m.status = "partial";
    m.failed_stage = stage;
    m.error = e.what();
    m.finished_at = utc_now();
    write_manifest(m, manifest_path);
    throw StageError(e.kind(), stage, manifest_path, fmt::format("stage '{}' failed: {}", stage, e.what()));
  } catch (const std::exception& e) {
    m.status = "partial";
    m.failed_stage = stage;
    m.error = e.what();
    m.finished_at = utc_now();
    write_manifest(m, manifest_path);
    throw StageError(ErrorKind::kEnvironment, stage, manifest_path,
                     fmt::format("stage '{}' failed: {}", stage, e.what()));
  }
  m.source = manifest_path;
  return m;
}

}  // namespace arvote
