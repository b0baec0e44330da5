#include "arvote/serialize.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "arvote/error.hpp"

namespace arvote {

void expect_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view context) {
  if (!obj.is_object()) throw ConfigError(fmt::format("{}: expected an object", context));
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(fmt::format("{}: unknown key '{}'", context, key));
    }
  }
}

void to_json(json& j, const CleanOptions& o) {
  j = {{"strip_rt", to_string(o.strip_rt)}, {"normalize_arabic", o.normalize_arabic}};
}

void to_json(json& j, const ToyConfig& c) {
  j = {{"orders", c.orders}, {"dim", c.dim}, {"hash_seed", c.hash_seed}};
}

void to_json(json& j, const BackboneSpec& s) {
  j = {{"name", s.name}, {"kind", to_string(s.kind)}, {"max_seq_len", s.max_seq_len}, {"num_labels", s.num_labels}};
  if (s.kind == BackboneKind::kToy) {
    j["toy"] = s.toy;
  } else {
    j["checkpoint"] = s.checkpoint;
  }
}

void to_json(json& j, const AdamWConfig& c) {
  j = {{"beta1", c.beta1}, {"beta2", c.beta2}, {"epsilon", c.epsilon}, {"weight_decay", c.weight_decay}};
}

void to_json(json& j, const TrainConfig& c) {
  j = {{"epochs", c.epochs},
       {"learning_rate", c.learning_rate},
       {"batch_size", c.batch_size},
       {"adamw", c.adamw},
       {"seed", c.seed},
       {"checkpoint_selection", to_string(c.selection)}};
}

void to_json(json& j, const EpochRecord& r) {
  j = {{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"steps", r.steps}};
  j["dev_micro_f1"] = r.dev_micro_f1 ? json(*r.dev_micro_f1) : json(nullptr);
}

void to_json(json& j, const IngestReport& r) {
  j = {{"rows_read", r.rows_read},
       {"rows_dropped_null", r.rows_dropped_null},
       {"rows_dropped_dupe_id", r.rows_dropped_dupe_id},
       {"warnings", r.warnings}};
}

namespace {

template <typename T>
T get_as(const json& j, std::string_view key, std::string_view context) {
  try {
    return j.at(std::string(key)).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("{}: key '{}' has the wrong type", context, key));
  }
}

}  // namespace

CleanOptions clean_options_from_json(const json& j) {
  expect_keys(j, {"strip_rt", "normalize_arabic"}, "preprocess");
  CleanOptions o;
  if (j.contains("strip_rt")) o.strip_rt = parse_rt_mode(get_as<std::string>(j, "strip_rt", "preprocess"));
  if (j.contains("normalize_arabic")) o.normalize_arabic = get_as<bool>(j, "normalize_arabic", "preprocess");
  return o;
}

BackboneSpec backbone_from_json(const json& j, BackboneSpec base) {
  expect_keys(j, {"name", "kind", "max_seq_len", "num_labels", "checkpoint", "toy"}, "backbone");
  if (j.contains("name")) base.name = get_as<std::string>(j, "name", "backbone");
  if (j.contains("kind")) {
    const auto kind = get_as<std::string>(j, "kind", "backbone");
    if (kind != to_string(base.kind)) throw ConfigError(fmt::format("backbone '{}': kind is fixed by the registry", base.name));
  }
  if (j.contains("max_seq_len")) base.max_seq_len = get_as<std::size_t>(j, "max_seq_len", "backbone");
  if (j.contains("num_labels")) base.num_labels = get_as<std::size_t>(j, "num_labels", "backbone");
  if (j.contains("checkpoint")) base.checkpoint = get_as<std::string>(j, "checkpoint", "backbone");
  if (j.contains("toy")) {
    const auto& t = j.at("toy");
    expect_keys(t, {"orders", "dim", "hash_seed"}, "backbone.toy");
    if (t.contains("orders")) base.toy.orders = get_as<std::vector<int>>(t, "orders", "backbone.toy");
    if (t.contains("dim")) base.toy.dim = get_as<std::size_t>(t, "dim", "backbone.toy");
    if (t.contains("hash_seed")) base.toy.hash_seed = get_as<std::uint64_t>(t, "hash_seed", "backbone.toy");
  }
  base.validate();
  return base;
}

TrainConfig train_config_from_json(const json& j, BackboneKind kind) {
  TrainConfig c = TrainConfig::defaults_for(kind);
  expect_keys(j, {"epochs", "learning_rate", "batch_size", "adamw", "seed", "checkpoint_selection"}, "train");
  if (j.contains("epochs")) c.epochs = get_as<int>(j, "epochs", "train");
  if (j.contains("learning_rate")) c.learning_rate = get_as<double>(j, "learning_rate", "train");
  if (j.contains("batch_size")) c.batch_size = get_as<std::size_t>(j, "batch_size", "train");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed", "train");
  if (j.contains("checkpoint_selection")) {
    c.selection = parse_selection(get_as<std::string>(j, "checkpoint_selection", "train"));
  }
  if (j.contains("adamw")) {
    const auto& a = j.at("adamw");
    expect_keys(a, {"beta1", "beta2", "epsilon", "weight_decay"}, "train.adamw");
    if (a.contains("beta1")) c.adamw.beta1 = get_as<double>(a, "beta1", "train.adamw");
    if (a.contains("beta2")) c.adamw.beta2 = get_as<double>(a, "beta2", "train.adamw");
    if (a.contains("epsilon")) c.adamw.epsilon = get_as<double>(a, "epsilon", "train.adamw");
    if (a.contains("weight_decay")) c.adamw.weight_decay = get_as<double>(a, "weight_decay", "train.adamw");
  }
  c.validate();
  return c;
}

EpochRecord epoch_record_from_json(const json& j) {
  EpochRecord r;
  r.epoch = j.at("epoch").get<int>();
  r.train_loss = j.at("train_loss").get<double>();
  r.steps = j.value("steps", std::uint64_t{0});
  if (j.contains("dev_micro_f1") && !j.at("dev_micro_f1").is_null()) r.dev_micro_f1 = j.at("dev_micro_f1").get<double>();
  return r;
}

}  // namespace arvote
