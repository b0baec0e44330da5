#include "external.hpp"

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "arvote/error.hpp"
#include "arvote/serialize.hpp"

extern char** environ;

namespace arvote {

namespace detail {

int run_adapter(const std::string& adapter, const std::vector<std::string>& args) {
  std::vector<std::string> storage;
  storage.push_back(adapter);
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);

  pid_t pid = 0;
  if (posix_spawn(&pid, adapter.c_str(), nullptr, nullptr, argv.data(), environ) != 0) {
    throw EnvironmentError("cannot launch external adapter: " + adapter);
  }
  int status = 0;
  if (waitpid(pid, &status, 0) < 0) throw EnvironmentError("waiting for external adapter failed: " + adapter);
  if (!WIFEXITED(status)) throw EnvironmentError("external adapter terminated abnormally: " + adapter);
  return WEXITSTATUS(status);
}

std::string resolve_adapter() {
  const char* value = std::getenv(kAdapterEnvVar);
  if (value == nullptr || *value == '\0') {
    throw EnvironmentError(fmt::format(
        "external transformer runtime is not configured: set {} to the adapter executable "
        "(the toy-ngram backbone needs no runtime)",
        kAdapterEnvVar));
  }
  if (::access(value, X_OK) != 0) {
    throw EnvironmentError(fmt::format("{}={} is not an executable file", kAdapterEnvVar, value));
  }
  return value;
}

PredictionSet predict_external(const FittedModel& model, const Dataset& data) {
  const auto& handle = std::get<ExternalHandle>(model.weights);
  const auto adapter = resolve_adapter();
  const std::filesystem::path dir(handle.model_dir);
  const auto digest = dataset_digest(data).substr(0, 16);
  const auto input = (dir / ("predict-" + digest + ".input.tsv")).string();
  const auto output = (dir / ("predict-" + digest + ".output.tsv")).string();
  write_dataset_tsv(data, input);

  const int status = run_adapter(adapter, {"predict", "--model-dir", handle.model_dir, "--data", input, "--max-seq-len",
                                           std::to_string(model.spec.max_seq_len), "--out", output});
  if (status != 0) {
    throw EnvironmentError(fmt::format("external adapter predict for '{}' failed with status {}", model.name, status));
  }
  auto preds = read_predictions(output, model.labelspace);
  preds.set_model_name(model.name);
  if (preds.size() != data.size()) {
    throw DataError(fmt::format("external adapter returned {} predictions for {} examples", preds.size(), data.size()));
  }
  for (const auto& e : data.examples) {
    if (!preds.find(e.id)) throw DataError(fmt::format("external adapter output is missing id '{}'", e.id));
  }
  return preds;
}

}  // namespace detail

FittedModel fine_tune_external(const BackboneSpec& spec, const Dataset& train_set, const Dataset& dev_set,
                               const TrainConfig& cfg, const std::filesystem::path& work_dir) {
  if (spec.kind != BackboneKind::kExternal) {
    throw ContractError("fine_tune_external: backbone '" + spec.name + "' is not an external backbone");
  }
  spec.validate();
  cfg.validate();
  if (train_set.empty()) throw ConfigError("fine_tune_external: training set is empty");
  const auto adapter = detail::resolve_adapter();

  std::error_code ec;
  std::filesystem::create_directories(work_dir / "model", ec);
  if (ec) throw EnvironmentError("cannot create adapter work directory " + work_dir.string() + ": " + ec.message());

  const auto train_path = (work_dir / "train.tsv").string();
  const auto dev_path = (work_dir / "dev.tsv").string();
  const auto config_path = (work_dir / "config.json").string();
  const auto model_dir = (work_dir / "model").string();
  write_dataset_tsv(train_set, train_path);
  write_dataset_tsv(dev_set, dev_path);
  {
    json config = {{"backbone", spec.name},
                   {"checkpoint", spec.checkpoint},
                   {"max_seq_len", spec.max_seq_len},
                   {"labels", train_set.labelspace.labels()},
                   {"train_config", cfg}};
    std::ofstream out(config_path);
    out << config.dump(2) << '\n';
    if (!out) throw EnvironmentError("cannot write " + config_path);
  }

  const int status = detail::run_adapter(adapter, {"train", "--checkpoint", spec.checkpoint, "--train", train_path,
                                                   "--dev", dev_path, "--config", config_path, "--out", model_dir});
  if (status == kAdapterCheckpointMissing) {
    throw EnvironmentError(fmt::format("checkpoint '{}' for registry entry '{}' could not be resolved by the adapter",
                                       spec.checkpoint, spec.name));
  }
  if (status != 0) {
    throw EnvironmentError(fmt::format("external adapter training for '{}' failed with status {}", spec.name, status));
  }

  const auto info_path = std::filesystem::path(model_dir) / "adapter_model.json";
  std::ifstream in(info_path);
  if (!in) throw EnvironmentError("adapter did not write " + info_path.string());
  json info;
  try {
    info = json::parse(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
  } catch (const json::exception& e) {
    throw EnvironmentError(fmt::format("{}: {}", info_path.string(), e.what()));
  }

  FittedModel model;
  model.name = spec.name;
  model.spec = spec;
  model.train_config = cfg;
  model.labelspace = train_set.labelspace;
  try {
    for (const auto& r : info.at("history")) model.history.push_back(epoch_record_from_json(r));
    model.selected_epoch = info.at("selected_epoch").get<int>();
    model.weights = ExternalHandle{model_dir, info.value("runtime", ""), info.value("runtime_version", ""),
                                   info.value("checkpoint_version", "")};
  } catch (const json::exception& e) {
    throw EnvironmentError(fmt::format("{}: {}", info_path.string(), e.what()));
  }
  if (model.history.size() != static_cast<std::size_t>(cfg.epochs) || model.selected_epoch < 1 ||
      model.selected_epoch > cfg.epochs) {
    throw EnvironmentError(fmt::format("{}: history must have {} epochs and a selected epoch in range",
                                       info_path.string(), cfg.epochs));
  }
  return model;
}

}  // namespace arvote
