#pragma once

#include <initializer_list>
#include <string_view>

#include <json.hpp>

#include "arvote/corpus.hpp"
#include "arvote/models.hpp"

namespace arvote {

using json = nlohmann::json;

/// Throws ConfigError if `obj` is not an object or has a key outside `allowed`.
void expect_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view context);

void to_json(json& j, const CleanOptions& o);
void to_json(json& j, const ToyConfig& c);
void to_json(json& j, const BackboneSpec& s);
void to_json(json& j, const AdamWConfig& c);
void to_json(json& j, const TrainConfig& c);
void to_json(json& j, const EpochRecord& r);
void to_json(json& j, const IngestReport& r);

CleanOptions clean_options_from_json(const json& j);
/// Starts from `base` and applies the overrides present in `j`.
BackboneSpec backbone_from_json(const json& j, BackboneSpec base);
TrainConfig train_config_from_json(const json& j, BackboneKind kind);
EpochRecord epoch_record_from_json(const json& j);

}  // namespace arvote
