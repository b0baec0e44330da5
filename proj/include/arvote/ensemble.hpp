#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arvote/prediction.hpp"

namespace arvote {

enum class TieBreak { kAnchorModel, kPositiveLabel, kHighestMeanConfidence };
std::string_view to_string(TieBreak t);
TieBreak parse_tie_break(std::string_view s);

struct VoteConfig {
  /// Member model names, matched against PredictionSet::model_name().
  std::vector<std::string> members;
  TieBreak tie_break = TieBreak::kAnchorModel;
  /// Required for kAnchorModel.
  std::optional<std::string> anchor;
  /// Positive class of the task; required for kPositiveLabel and used as the
  /// last resort for kHighestMeanConfidence.
  std::optional<std::string> positive_label;

  /// Throws ConfigError on empty or repeated members or a missing anchor.
  void validate() const;
};

/// Hard voting: per id the modal label wins; when several labels share the
/// top count the tie-break policy decides among them. The output confidence
/// is the winning label's vote share and the model name is "ensemble".
PredictionSet hard_vote(std::span<const PredictionSet> sets, const VoteConfig& cfg);

struct AgreementReport {
  std::vector<std::string> members;
  /// Per id (in the first member's order): label -> number of votes.
  std::vector<std::pair<std::string, std::map<std::string, std::size_t>>> histograms;
  std::size_t unanimous = 0;
  /// Ids with no unique modal label.
  std::size_t ties = 0;
  /// Fraction of ids on which members i and j agree.
  std::vector<std::vector<double>> pairwise;
};

AgreementReport agreement_stats(std::span<const PredictionSet> sets);

}  // namespace arvote
