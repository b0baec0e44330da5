#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "arvote/corpus.hpp"
#include "arvote/ensemble.hpp"
#include "arvote/error.hpp"
#include "arvote/evalkit.hpp"
#include "arvote/expctl/config.hpp"
#include "arvote/expctl/pipeline.hpp"
#include "arvote/expctl/report.hpp"
#include "arvote/models.hpp"
#include "arvote/version.hpp"

using namespace arvote;

namespace {

const std::vector<std::string> kTasks{"task1a", "task2a"};
const std::vector<std::string> kRtModes{"leading", "anywhere"};
const std::vector<std::string> kFormats{"tsv", "jsonl"};
const std::vector<std::string> kSplits{"train", "dev", "test"};

struct Options {
  std::string config;
  std::string task = "task1a";
  std::optional<std::uint64_t> seed;
  bool force = false;
  bool strict = false;
  std::string strip_rt;
  bool normalize_arabic = false;
  bool sequential = false;
  std::string format = "tsv";

  // ingest
  std::string data;
  std::string split = "train";
  std::string out;

  // train
  std::string backbone = "toy-ngram";
  std::string train_path;
  std::string dev_path;
  std::optional<int> epochs;
  std::optional<double> learning_rate;
  std::optional<std::size_t> batch_size;
  std::string selection;
  std::string work_dir;

  // predict / vote / eval / report
  std::string model;
  std::vector<std::string> predictions;
  std::string tie_break = "anchor_model";
  std::string anchor;
  std::string gold;
  bool as_json = false;
  std::vector<std::string> manifests;
  std::string style = "test_table";
  std::string table_format = "text";
};

CleanOptions clean_options(const Options& o, CleanOptions base = {}) {
  if (!o.strip_rt.empty()) base.strip_rt = parse_rt_mode(o.strip_rt);
  if (o.normalize_arabic) base.normalize_arabic = true;
  return base;
}

void write_or_print(const std::string& contents, const std::string& path) {
  if (path.empty() || path == "-") {
    std::fwrite(contents.data(), 1, contents.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EnvironmentError("cannot write " + path);
  out << contents;
}

ExperimentConfig experiment_from(const Options& o) {
  auto cfg = load_config(o.config);
  if (o.seed) override_seed(cfg, *o.seed);
  if (o.strict) cfg.strict = true;
  cfg.preprocess = clean_options(o, cfg.preprocess);
  return cfg;
}

int cmd_ingest(const Options& o) {
  json report = json::object();
  auto one = [&](const std::string& path, Task task, Split split, DataFormat fmt, const LoadOptions& lo,
                 const CleanOptions& co) {
    auto loaded = load_dataset(path, fmt, LabelSpace::for_task(task), split, lo);
    for (const auto& w : loaded.report.warnings) spdlog::warn(w);
    const auto cleaned = clean_dataset(std::move(loaded.dataset), co);
    const auto summary = split_summary(cleaned);
    report[std::string(to_string(split))] = {{"path", path},
                                             {"sha256", cleaned.provenance.sha256},
                                             {"report", loaded.report},
                                             {"labels", summary.per_label},
                                             {"unlabeled", summary.unlabeled},
                                             {"total", summary.total}};
    return cleaned;
  };

  if (!o.config.empty()) {
    const auto cfg = experiment_from(o);
    const LoadOptions lo{cfg.duplicates};
    one(cfg.resolve(cfg.data.train), cfg.task, Split::kTrain, cfg.data.format, lo, cfg.preprocess);
    one(cfg.resolve(cfg.data.dev), cfg.task, Split::kDev, cfg.data.format, lo, cfg.preprocess);
    if (cfg.data.test) one(cfg.resolve(*cfg.data.test), cfg.task, Split::kTest, cfg.data.format, lo, cfg.preprocess);
  } else {
    if (o.data.empty()) throw ConfigError("ingest needs --config or --data");
    const auto cleaned =
        one(o.data, parse_task(o.task), parse_split(o.split), parse_format(o.format), {}, clean_options(o));
    if (!o.out.empty()) write_dataset_tsv(cleaned, o.out);
  }
  fmt::print("{}\n", report.dump(2));
  return 0;
}

int cmd_train(const Options& o) {
  if (o.train_path.empty() || o.dev_path.empty() || o.out.empty()) {
    throw ConfigError("train needs --train, --dev and --out");
  }
  const auto task = parse_task(o.task);
  const auto space = LabelSpace::for_task(task);
  const auto fmt_ = parse_format(o.format);
  const auto co = clean_options(o);
  const auto train_set = clean_dataset(load_dataset(o.train_path, fmt_, space, Split::kTrain).dataset, co);
  const auto dev_set = clean_dataset(load_dataset(o.dev_path, fmt_, space, Split::kDev).dataset, co);

  const auto& spec = lookup_backbone(o.backbone);
  auto cfg = TrainConfig::defaults_for(spec.kind);
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.learning_rate) cfg.learning_rate = *o.learning_rate;
  if (o.batch_size) cfg.batch_size = *o.batch_size;
  if (o.seed) cfg.seed = *o.seed;
  if (!o.selection.empty()) cfg.selection = parse_selection(o.selection);

  FittedModel model;
  if (spec.kind == BackboneKind::kToy) {
    model = train(spec, train_set, dev_set, cfg);
  } else {
    const auto work = o.work_dir.empty() ? std::filesystem::path(o.out).parent_path() / (spec.name + ".work")
                                         : std::filesystem::path(o.work_dir);
    model = fine_tune_external(spec, train_set, dev_set, cfg, work);
  }
  model.preprocess = co;
  save_model(model, o.out);
  for (const auto& r : model.history) {
    spdlog::info("epoch {:>3}  loss {:.6f}  dev micro F1 {}", r.epoch, r.train_loss,
                 r.dev_micro_f1 ? fmt::format("{:.4f}", *r.dev_micro_f1) : "-");
  }
  fmt::print("{}\tselected epoch {}\t{}\n", o.out, model.selected_epoch, model_digest(model));
  return 0;
}

int cmd_predict(const Options& o) {
  if (o.model.empty() || o.data.empty()) throw ConfigError("predict needs --model and --data");
  const auto model = load_model(o.model);
  auto data = load_dataset(o.data, parse_format(o.format), model.labelspace, parse_split(o.split)).dataset;
  data = clean_dataset(std::move(data), model.preprocess);
  write_or_print(format_predictions(predict(model, data), {o.strict}), o.out);
  return 0;
}

int cmd_vote(const Options& o) {
  if (o.predictions.empty()) throw ConfigError("vote needs at least one --predictions file");
  const auto space = LabelSpace::for_task(parse_task(o.task));
  std::vector<PredictionSet> sets;
  VoteConfig cfg;
  for (const auto& path : o.predictions) {
    sets.push_back(read_predictions(path, space));
    cfg.members.push_back(sets.back().model_name());
  }
  cfg.tie_break = parse_tie_break(o.tie_break);
  cfg.positive_label = space.positive();
  if (!o.anchor.empty()) {
    cfg.anchor = o.anchor;
  } else if (cfg.tie_break == TieBreak::kAnchorModel) {
    cfg.anchor = cfg.members.front();
    spdlog::warn("no --anchor given; using the first member '{}'", *cfg.anchor);
  }
  write_or_print(format_predictions(hard_vote(sets, cfg), {o.strict}), o.out);
  return 0;
}

int cmd_eval(const Options& o) {
  if (o.gold.empty() || o.predictions.empty()) throw ConfigError("eval needs --gold and --predictions");
  const auto space = LabelSpace::for_task(parse_task(o.task));
  const auto gold = load_dataset(o.gold, parse_format(o.format), space, parse_split(o.split)).dataset;
  std::vector<PredictionSet> sets;
  for (const auto& path : o.predictions) sets.push_back(read_predictions(path, space));
  const auto reports = score_report(gold, sets);
  if (o.as_json) {
    json j = json::array();
    for (const auto& r : reports) j.push_back(r);
    fmt::print("{}\n", j.dump(2));
  } else {
    fmt::print("{}", render_metric_reports(reports));
  }
  return 0;
}

int cmd_report(const Options& o) {
  if (o.manifests.empty()) throw ConfigError("report needs at least one manifest");
  std::vector<RunManifest> manifests;
  for (const auto& path : o.manifests) manifests.push_back(read_manifest(path));
  const auto format = o.table_format == "csv" ? TableFormat::kCsv : TableFormat::kText;
  write_or_print(emit_report(manifests, parse_report_style(o.style), format), o.out);
  return 0;
}

int cmd_run(const Options& o) {
  if (o.config.empty()) throw ConfigError("run needs --config");
  const auto cfg = experiment_from(o);
  const auto m = run_experiment(cfg, RunOptions{o.force, !o.sequential});
  for (const auto& mem : m.members) {
    spdlog::info("member {:<24} dev micro F1 {:.4f}{}", mem.name, mem.dev_metrics->micro_f1,
                 mem.cache_hit ? "  (cached)" : "");
  }
  spdlog::info("ensemble dev micro F1 {:.4f}", m.ensemble->dev_metrics->micro_f1);
  fmt::print("{}\n", m.source);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("arvote");
  spdlog::set_default_logger(logger);

  CLI::App app{"Hard-voting ensembles of binary Arabic text classifiers"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Errors only");

  Options o;
  auto add_task = [&](CLI::App* c) { c->add_option("--task", o.task, "Task")->check(CLI::IsMember(kTasks)); };
  auto add_format = [&](CLI::App* c) {
    c->add_option("--format", o.format, "Data file format")->check(CLI::IsMember(kFormats));
  };
  auto add_clean = [&](CLI::App* c) {
    c->add_option("--strip-rt", o.strip_rt, "Remove RT as the leading token only or anywhere")
        ->check(CLI::IsMember(kRtModes));
    c->add_flag("--normalize-arabic", o.normalize_arabic, "Drop diacritics and tatweel");
  };

  auto* ingest = app.add_subcommand("ingest", "Load and clean data, print row accounting");
  ingest->add_option("--config", o.config, "Experiment config");
  ingest->add_option("--data", o.data, "Single data file");
  ingest->add_option("--split", o.split, "Split of --data")->check(CLI::IsMember(kSplits));
  ingest->add_option("--out", o.out, "Write the cleaned split as TSV");
  ingest->add_option("--seed", o.seed, "Global seed override");
  add_task(ingest);
  add_format(ingest);
  add_clean(ingest);

  auto* train_cmd = app.add_subcommand("train", "Fine-tune one backbone and save a checkpoint");
  train_cmd->add_option("--backbone", o.backbone, "Registry name")->check(CLI::IsMember(backbone_names()));
  train_cmd->add_option("--train", o.train_path, "Training file")->required();
  train_cmd->add_option("--dev", o.dev_path, "Dev file")->required();
  train_cmd->add_option("--out", o.out, "Checkpoint path")->required();
  train_cmd->add_option("--epochs", o.epochs, "Epochs");
  train_cmd->add_option("--learning-rate", o.learning_rate, "Learning rate");
  train_cmd->add_option("--batch-size", o.batch_size, "Batch size");
  train_cmd->add_option("--selection", o.selection, "best_dev or last_epoch");
  train_cmd->add_option("--seed", o.seed, "Shuffle seed");
  train_cmd->add_option("--work-dir", o.work_dir, "Adapter exchange directory (external backbones)");
  add_task(train_cmd);
  add_format(train_cmd);
  add_clean(train_cmd);

  auto* predict_cmd = app.add_subcommand("predict", "Predict a data file with a saved checkpoint");
  predict_cmd->add_option("--model", o.model, "Checkpoint")->required();
  predict_cmd->add_option("--data", o.data, "Data file")->required();
  predict_cmd->add_option("--split", o.split, "Split of --data")->check(CLI::IsMember(kSplits));
  predict_cmd->add_option("--out", o.out, "Prediction file (default stdout)");
  predict_cmd->add_flag("--strict", o.strict, "Emit id and label only");
  add_format(predict_cmd);

  auto* vote = app.add_subcommand("vote", "Hard-vote prediction files");
  vote->add_option("--predictions", o.predictions, "Member prediction files (stem = member name)")->required();
  vote->add_option("--tie-break", o.tie_break, "anchor_model, positive_label or highest_mean_confidence");
  vote->add_option("--anchor", o.anchor, "Anchor member for anchor_model");
  vote->add_option("--out", o.out, "Ensemble prediction file (default stdout)");
  vote->add_flag("--strict", o.strict, "Emit id and label only");
  add_task(vote);

  auto* eval = app.add_subcommand("eval", "Score prediction files against gold labels");
  eval->add_option("--gold", o.gold, "Gold data file")->required();
  eval->add_option("--predictions", o.predictions, "Prediction files")->required();
  eval->add_option("--split", o.split, "Split of --gold")->check(CLI::IsMember(kSplits));
  eval->add_flag("--json", o.as_json, "JSON output");
  add_task(eval);
  add_format(eval);

  auto* report = app.add_subcommand("report", "Render a results table from run manifests");
  report->add_option("manifests", o.manifests, "manifest.json files")->required();
  report->add_option("--style", o.style, "dev_table or test_table");
  report->add_option("--table-format", o.table_format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
  report->add_option("--out", o.out, "Output file (default stdout)");

  auto* run = app.add_subcommand("run", "Run a full experiment from a config");
  run->add_option("--config", o.config, "Experiment config")->required();
  run->add_option("--seed", o.seed, "Global seed override");
  run->add_flag("--force", o.force, "Retrain even when cached checkpoints exist");
  run->add_flag("--strict", o.strict, "Submission files carry id and label only");
  run->add_flag("--sequential", o.sequential, "Train members one at a time");
  add_task(run);
  add_clean(run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::err : spdlog::level::info);

  try {
    if (*ingest) return cmd_ingest(o);
    if (*train_cmd) return cmd_train(o);
    if (*predict_cmd) return cmd_predict(o);
    if (*vote) return cmd_vote(o);
    if (*eval) return cmd_eval(o);
    if (*report) return cmd_report(o);
    if (*run) return cmd_run(o);
  } catch (const StageError& e) {
    spdlog::error("{}", e.what());
    spdlog::error("partial manifest: {}", e.manifest_path());
    return exit_code_for(e.kind());
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
