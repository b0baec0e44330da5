#include "arvote/expctl/config.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include <fmt/format.h>

#include "arvote/digest.hpp"
#include "arvote/error.hpp"
#include "arvote/rng.hpp"

namespace arvote {

namespace fs = std::filesystem;

namespace {

bool valid_member_name(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) return false;
  }
  return name != "ensemble";
}

std::string required_string(const json& obj, const char* key, std::string_view context) {
  if (!obj.contains(key) || !obj.at(key).is_string() || obj.at(key).get<std::string>().empty()) {
    throw ConfigError(fmt::format("{}: '{}' must be a non-empty string", context, key));
  }
  return obj.at(key).get<std::string>();
}

}  // namespace

ExperimentConfig parse_config_impl(const json& doc, const std::string& base_dir);

std::string_view to_string(FinalFit f) { return f == FinalFit::kTrain ? "train" : "train+dev"; }

std::uint64_t derive_member_seed(std::uint64_t global_seed, std::string_view member_name) {
  return splitmix64(ngram_hash(member_name, global_seed));
}

std::string ExperimentConfig::resolve(const std::string& path) const {
  const fs::path p(path);
  if (p.is_absolute()) return p.string();
  return (fs::path(base_dir) / p).lexically_normal().string();
}

json ExperimentConfig::canonical() const {
  json members_json = json::array();
  for (const auto& m : members) {
    members_json.push_back({{"name", m.name}, {"spec", m.spec}, {"train", m.train}});
  }
  json data_json = {{"train", data.train}, {"dev", data.dev}, {"format", to_string(data.format)}};
  data_json["test"] = data.test ? json(*data.test) : json(nullptr);
  return {{"task", to_string(task)},
          {"data", data_json},
          {"preprocess", preprocess},
          {"duplicate_ids", duplicates == DuplicatePolicy::kError ? "error" : "drop"},
          {"members", members_json},
          {"vote",
           {{"members", vote.members},
            {"tie_break", to_string(vote.tie_break)},
            {"anchor", vote.anchor ? json(*vote.anchor) : json(nullptr)}}},
          {"output_dir", output_dir},
          {"seed", seed},
          {"final_fit", to_string(final_fit)},
          {"strict", strict},
          {"run_label", run_label}};
}

std::string ExperimentConfig::digest() const { return sha256_hex(canonical().dump()); }

ExperimentConfig parse_config_impl(const json& doc, const std::string& base_dir) {
  expect_keys(doc,
              {"task", "data", "preprocess", "duplicate_ids", "members", "vote", "output_dir", "seed", "final_fit",
               "strict", "run_label"},
              "config");
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  cfg.task = parse_task(required_string(doc, "task", "config"));

  if (!doc.contains("data")) throw ConfigError("config: 'data' section is required");
  const auto& data = doc.at("data");
  expect_keys(data, {"train", "dev", "test", "format"}, "config.data");
  cfg.data.train = required_string(data, "train", "config.data");
  cfg.data.dev = required_string(data, "dev", "config.data");
  if (data.contains("test") && !data.at("test").is_null()) cfg.data.test = required_string(data, "test", "config.data");
  if (data.contains("format")) cfg.data.format = parse_format(required_string(data, "format", "config.data"));

  if (doc.contains("preprocess")) cfg.preprocess = clean_options_from_json(doc.at("preprocess"));
  if (doc.contains("duplicate_ids")) {
    const auto v = required_string(doc, "duplicate_ids", "config");
    if (v == "drop") cfg.duplicates = DuplicatePolicy::kDropWithWarning;
    else if (v == "error") cfg.duplicates = DuplicatePolicy::kError;
    else throw ConfigError("config: duplicate_ids must be 'drop' or 'error'");
  }
  cfg.output_dir = required_string(doc, "output_dir", "config");
  if (doc.contains("seed")) {
    const auto& seed = doc.at("seed");
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) throw ConfigError("config: seed must be a non-negative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("final_fit")) {
    const auto v = required_string(doc, "final_fit", "config");
    if (v == "train") cfg.final_fit = FinalFit::kTrain;
    else if (v == "train+dev") cfg.final_fit = FinalFit::kTrainPlusDev;
    else throw ConfigError("config: final_fit must be 'train' or 'train+dev'");
  }
  if (doc.contains("strict")) cfg.strict = doc.at("strict").get<bool>();
  if (doc.contains("run_label")) cfg.run_label = doc.at("run_label").get<std::string>();

  if (!doc.contains("members") || !doc.at("members").is_array() || doc.at("members").empty()) {
    throw ConfigError("config: 'members' must be a non-empty list");
  }
  std::set<std::string> names;
  for (const auto& mj : doc.at("members")) {
    expect_keys(mj, {"name", "backbone", "spec", "train"}, "config.members[]");
    const auto backbone = required_string(mj, "backbone", "config.members[]");
    MemberConfig m;
    m.spec = lookup_backbone(backbone);
    if (mj.contains("spec")) m.spec = backbone_from_json(mj.at("spec"), m.spec);
    m.name = mj.contains("name") ? required_string(mj, "name", "config.members[]") : backbone;
    if (!valid_member_name(m.name)) {
      throw ConfigError(fmt::format("config: member name '{}' must use [A-Za-z0-9._-] and not be 'ensemble'", m.name));
    }
    if (!names.insert(m.name).second) throw ConfigError(fmt::format("config: duplicate member name '{}'", m.name));
    const json train_json = mj.contains("train") ? mj.at("train") : json::object();
    m.train = train_config_from_json(train_json, m.spec.kind);
    m.explicit_seed = train_json.contains("seed");
    if (!m.explicit_seed) m.train.seed = derive_member_seed(cfg.seed, m.name);
    cfg.members.push_back(std::move(m));
  }

  for (const auto& m : cfg.members) cfg.vote.members.push_back(m.name);
  if (doc.contains("vote")) {
    const auto& v = doc.at("vote");
    expect_keys(v, {"members", "tie_break", "anchor"}, "config.vote");
    if (v.contains("members")) {
      cfg.vote.members = v.at("members").get<std::vector<std::string>>();
      for (const auto& name : cfg.vote.members) {
        if (!names.count(name)) throw ConfigError(fmt::format("config.vote: '{}' is not a configured member", name));
      }
    }
    if (v.contains("tie_break")) cfg.vote.tie_break = parse_tie_break(required_string(v, "tie_break", "config.vote"));
    if (v.contains("anchor") && !v.at("anchor").is_null()) cfg.vote.anchor = required_string(v, "anchor", "config.vote");
  }
  if (cfg.vote.members.empty()) throw ConfigError("config.vote: member list is empty");
  if (cfg.vote.anchor && std::find(cfg.vote.members.begin(), cfg.vote.members.end(), *cfg.vote.anchor) ==
                             cfg.vote.members.end()) {
    throw ConfigError(fmt::format("config.vote: anchor '{}' is not a voting member", *cfg.vote.anchor));
  }
  cfg.vote.positive_label = LabelSpace::for_task(cfg.task).positive();

  std::set<std::string> paths{cfg.resolve(cfg.data.train)};
  if (!paths.insert(cfg.resolve(cfg.data.dev)).second ||
      (cfg.data.test && !paths.insert(cfg.resolve(*cfg.data.test)).second)) {
    throw ConfigError("config.data: train, dev and test paths must be distinct");
  }
  return cfg;
}

ExperimentConfig parse_config(const json& doc, const std::string& base_dir) {
  try {
    return parse_config_impl(doc, base_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  json doc;
  try {
    doc = json::parse(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  const auto parent = fs::path(path).parent_path();
  return parse_config(doc, parent.empty() ? "." : parent.string());
}

void override_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  for (auto& m : cfg.members) {
    if (!m.explicit_seed) m.train.seed = derive_member_seed(seed, m.name);
  }
}

}  // namespace arvote
