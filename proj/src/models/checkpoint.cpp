#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "arvote/digest.hpp"
#include "arvote/error.hpp"
#include "arvote/serialize.hpp"

namespace arvote {

namespace {

json to_blob(const FittedModel& model) {
  json j = {{"magic", kCheckpointMagic},
            {"format_version", kCheckpointVersion},
            {"name", model.name},
            {"spec", model.spec},
            {"train_config", model.train_config},
            {"task", to_string(model.labelspace.task())},
            {"preprocess", model.preprocess},
            {"history", model.history},
            {"selected_epoch", model.selected_epoch},
            {"warnings", model.warnings}};
  if (const auto* params = std::get_if<Parameters>(&model.weights)) {
    json blocks = json::array();
    for (const auto& b : *params) blocks.push_back({{"name", b.name}, {"values", b.values}});
    j["parameters"] = std::move(blocks);
  } else {
    const auto& h = std::get<ExternalHandle>(model.weights);
    j["external"] = {{"model_dir", h.model_dir},
                     {"runtime", h.runtime},
                     {"runtime_version", h.runtime_version},
                     {"checkpoint_version", h.checkpoint_version}};
  }
  return j;
}

}  // namespace

std::string serialize_model(const FittedModel& model) { return to_blob(model).dump(); }

FittedModel deserialize_model(std::string_view blob, std::string_view source) {
  auto fail = [&](const std::string& what) { return DataError(fmt::format("checkpoint {}: {}", source, what)); };
  json j;
  try {
    j = json::parse(blob);
  } catch (const json::exception& e) {
    throw fail(e.what());
  }
  if (!j.is_object() || j.value("magic", "") != kCheckpointMagic) throw fail("not an arvote checkpoint");
  if (j.value("format_version", 0) != kCheckpointVersion) {
    throw fail(fmt::format("unsupported format version {}", j.value("format_version", 0)));
  }

  FittedModel m;
  try {
    const auto& spec = j.at("spec");
    const auto kind = spec.at("kind").get<std::string>() == "toy" ? BackboneKind::kToy : BackboneKind::kExternal;
    BackboneSpec base;
    base.kind = kind;
    base.name = spec.at("name").get<std::string>();
    m.spec = backbone_from_json(spec, base);
    m.name = j.at("name").get<std::string>();
    m.train_config = train_config_from_json(j.at("train_config"), kind);
    m.labelspace = LabelSpace::for_task(parse_task(j.at("task").get<std::string>()));
    m.preprocess = clean_options_from_json(j.at("preprocess"));
    for (const auto& r : j.at("history")) m.history.push_back(epoch_record_from_json(r));
    m.selected_epoch = j.at("selected_epoch").get<int>();
    m.warnings = j.value("warnings", std::vector<std::string>{});
    if (j.contains("parameters")) {
      Parameters params;
      for (const auto& b : j.at("parameters")) {
        params.push_back({b.at("name").get<std::string>(), b.at("values").get<std::vector<double>>()});
      }
      if (params.size() != 2 || params[0].values.size() != kNumLabels * m.spec.toy.dim ||
          params[1].values.size() != kNumLabels) {
        throw fail("parameter shapes do not match the backbone spec");
      }
      m.weights = std::move(params);
    } else {
      const auto& h = j.at("external");
      m.weights = ExternalHandle{h.at("model_dir").get<std::string>(), h.at("runtime").get<std::string>(),
                                 h.at("runtime_version").get<std::string>(),
                                 h.at("checkpoint_version").get<std::string>()};
    }
  } catch (const json::exception& e) {
    throw fail(e.what());
  } catch (const ConfigError& e) {
    throw fail(e.what());
  }
  return m;
}

void save_model(const FittedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EnvironmentError("cannot write checkpoint " + path);
  out << serialize_model(model);
  if (!out) throw EnvironmentError("failed writing checkpoint " + path);
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  const std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(blob, path);
}

std::string model_digest(const FittedModel& model) { return sha256_hex(serialize_model(model)); }

}  // namespace arvote
