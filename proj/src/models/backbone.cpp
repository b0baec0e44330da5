#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "arvote/error.hpp"
#include "arvote/models.hpp"

namespace arvote {

namespace {

BackboneSpec external(std::string name, std::string checkpoint, std::size_t max_seq_len = 512) {
  BackboneSpec s;
  s.name = std::move(name);
  s.kind = BackboneKind::kExternal;
  s.max_seq_len = max_seq_len;
  s.checkpoint = std::move(checkpoint);
  return s;
}

const std::vector<BackboneSpec>& registry() {
  static const std::vector<BackboneSpec> entries = [] {
    std::vector<BackboneSpec> r;
    r.push_back(external("arabertv02-twitter-base", "aubmindlab/bert-base-arabertv02-twitter"));
    r.push_back(external("arabertv1-base", "aubmindlab/bert-base-arabert"));
    r.push_back(external("arabertv2-base", "aubmindlab/bert-base-arabertv2"));
    r.push_back(external("marbertv2", "UBC-NLP/MARBERTv2", 128));
    r.push_back(external("araelectra-base-discriminator", "aubmindlab/araelectra-base-discriminator"));
    r.push_back(external("araelectra-base-generator", "aubmindlab/araelectra-base-generator"));
    BackboneSpec toy;
    toy.name = "toy-ngram";
    toy.kind = BackboneKind::kToy;
    toy.max_seq_len = 512;
    r.push_back(toy);
    return r;
  }();
  return entries;
}

}  // namespace

std::string_view to_string(BackboneKind kind) { return kind == BackboneKind::kToy ? "toy" : "external"; }

std::string_view to_string(CheckpointSelection s) {
  return s == CheckpointSelection::kBestDev ? "best_dev" : "last_epoch";
}

CheckpointSelection parse_selection(std::string_view s) {
  if (s == "best_dev") return CheckpointSelection::kBestDev;
  if (s == "last_epoch") return CheckpointSelection::kLastEpoch;
  throw ConfigError(fmt::format("unknown checkpoint selection '{}' (expected best_dev or last_epoch)", s));
}

const BackboneSpec& lookup_backbone(std::string_view name) {
  const auto& r = registry();
  const auto it = std::find_if(r.begin(), r.end(), [&](const BackboneSpec& s) { return s.name == name; });
  if (it == r.end()) {
    throw ConfigError(fmt::format("unknown backbone '{}'; known: {}", name, fmt::join(backbone_names(), ", ")));
  }
  return *it;
}

std::vector<std::string> backbone_names() {
  std::vector<std::string> names;
  for (const auto& s : registry()) names.push_back(s.name);
  return names;
}

void BackboneSpec::validate() const {
  if (name.empty()) throw ConfigError("backbone name must be non-empty");
  if (max_seq_len < 1) throw ConfigError(fmt::format("backbone '{}': max_seq_len must be >= 1", name));
  if (num_labels != kNumLabels) throw ConfigError(fmt::format("backbone '{}': num_labels must be 2", name));
  if (kind == BackboneKind::kToy) {
    if (toy.dim < 2) throw ConfigError(fmt::format("backbone '{}': hash dimension must be >= 2", name));
    if (toy.dim > (std::size_t{1} << 31)) throw ConfigError(fmt::format("backbone '{}': hash dimension too large", name));
    if (toy.orders.empty()) throw ConfigError(fmt::format("backbone '{}': at least one n-gram order required", name));
    for (int n : toy.orders) {
      if (n < 1) throw ConfigError(fmt::format("backbone '{}': n-gram orders must be >= 1", name));
    }
  } else if (checkpoint.empty()) {
    throw ConfigError(fmt::format("backbone '{}': external backbone needs a checkpoint id", name));
  }
}

TrainConfig TrainConfig::defaults_for(BackboneKind kind) {
  TrainConfig c;
  c.learning_rate = kind == BackboneKind::kExternal ? 1e-5 : 1e-2;
  return c;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(adamw.beta1 > 0.0 && adamw.beta1 < 1.0)) throw ConfigError("beta1 must lie in (0, 1)");
  if (!(adamw.beta2 > 0.0 && adamw.beta2 < 1.0)) throw ConfigError("beta2 must lie in (0, 1)");
  if (!(adamw.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (!(adamw.weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
}

}  // namespace arvote
