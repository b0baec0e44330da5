#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "arvote/corpus.hpp"

namespace arvote {

struct Prediction {
  std::string id;
  std::string label;
  /// Probability (or vote share) of the predicted label, in [0, 1].
  double confidence = 1.0;

  bool operator==(const Prediction&) const = default;
};

/// Per-example predictions of one model, in insertion order, unique by id.
class PredictionSet {
 public:
  PredictionSet() = default;
  explicit PredictionSet(std::string model_name) : model_name_(std::move(model_name)) {}

  const std::string& model_name() const { return model_name_; }
  void set_model_name(std::string name) { model_name_ = std::move(name); }

  /// Throws DataError on a repeated id or a confidence outside [0, 1].
  void add(Prediction p);

  const Prediction* find(const std::string& id) const;
  const std::vector<Prediction>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  bool operator==(const PredictionSet& other) const {
    return model_name_ == other.model_name_ && entries_ == other.entries_;
  }

 private:
  std::string model_name_;
  std::vector<Prediction> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct PredictionFileOptions {
  /// Emit id and label only.
  bool strict = false;
};

/// TSV `id<TAB>label<TAB>confidence` with a header row; confidence printed
/// with 6 decimals.
std::string format_predictions(const PredictionSet& ps, const PredictionFileOptions& options = {});
void write_predictions(const PredictionSet& ps, const std::string& path,
                       const PredictionFileOptions& options = {});

/// Parses the format written by write_predictions (both the 3-column and the
/// strict 2-column layout; strict rows read back with confidence 1.0). When a
/// label space is given every label must belong to it.
PredictionSet parse_predictions(std::string_view contents, std::string_view source,
                                const std::optional<LabelSpace>& labelspace = std::nullopt);
PredictionSet read_predictions(const std::string& path,
                               const std::optional<LabelSpace>& labelspace = std::nullopt);

}  // namespace arvote
