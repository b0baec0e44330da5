#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "arvote/ensemble.hpp"
#include "arvote/error.hpp"

namespace arvote {

namespace {

// Every set must cover exactly the union of ids.
void check_coverage(std::span<const PredictionSet> sets) {
  if (sets.empty()) throw ConfigError("voting needs at least one member");
  std::set<std::string> all;
  for (const auto& s : sets) {
    for (const auto& p : s.entries()) all.insert(p.id);
  }
  std::string problems;
  for (const auto& s : sets) {
    std::vector<std::string> missing;
    for (const auto& id : all) {
      if (!s.find(id)) missing.push_back(id);
    }
    if (missing.empty()) continue;
    const std::size_t shown = std::min<std::size_t>(missing.size(), 10);
    problems += fmt::format("\n  member '{}' is missing {} id(s): {}{}", s.model_name(), missing.size(),
                            fmt::join(missing.begin(), missing.begin() + shown, ", "),
                            missing.size() > shown ? ", ..." : "");
  }
  if (!problems.empty()) throw DataError("prediction sets cover different ids:" + problems);
}

}  // namespace

std::string_view to_string(TieBreak t) {
  switch (t) {
    case TieBreak::kAnchorModel:
      return "anchor_model";
    case TieBreak::kPositiveLabel:
      return "positive_label";
    case TieBreak::kHighestMeanConfidence:
      return "highest_mean_confidence";
  }
  return "?";
}

TieBreak parse_tie_break(std::string_view s) {
  if (s == "anchor_model") return TieBreak::kAnchorModel;
  if (s == "positive_label") return TieBreak::kPositiveLabel;
  if (s == "highest_mean_confidence") return TieBreak::kHighestMeanConfidence;
  throw ConfigError(fmt::format(
      "unknown tie-break '{}' (expected anchor_model, positive_label or highest_mean_confidence)", s));
}

void VoteConfig::validate() const {
  if (members.empty()) throw ConfigError("vote config: member list is empty");
  std::set<std::string> unique(members.begin(), members.end());
  if (unique.size() != members.size()) throw ConfigError("vote config: member names must be unique");
  if (tie_break == TieBreak::kAnchorModel) {
    if (!anchor) throw ConfigError("vote config: tie_break=anchor_model requires an anchor");
    if (!unique.count(*anchor)) throw ConfigError(fmt::format("vote config: anchor '{}' is not a member", *anchor));
  }
  if (tie_break == TieBreak::kPositiveLabel && !positive_label) {
    throw ConfigError("vote config: tie_break=positive_label requires the positive label");
  }
}

PredictionSet hard_vote(std::span<const PredictionSet> sets, const VoteConfig& cfg) {
  cfg.validate();
  if (sets.size() != cfg.members.size()) {
    throw ConfigError(fmt::format("vote config names {} members but {} prediction sets were given", cfg.members.size(),
                                  sets.size()));
  }
  for (const auto& name : cfg.members) {
    const bool present = std::any_of(sets.begin(), sets.end(), [&](const PredictionSet& s) { return s.model_name() == name; });
    if (!present) throw ConfigError(fmt::format("vote config member '{}' has no prediction set", name));
  }
  check_coverage(sets);

  const PredictionSet* anchor = nullptr;
  if (cfg.anchor) {
    for (const auto& s : sets) {
      if (s.model_name() == *cfg.anchor) anchor = &s;
    }
  }

  const auto n = static_cast<double>(sets.size());
  PredictionSet out("ensemble");
  for (const auto& entry : sets.front().entries()) {
    std::map<std::string, std::vector<double>> votes;
    for (const auto& s : sets) {
      const auto* p = s.find(entry.id);
      votes[p->label].push_back(p->confidence);
    }
    std::size_t top = 0;
    for (const auto& [label, confs] : votes) top = std::max(top, confs.size());
    std::vector<std::string> tied;
    for (const auto& [label, confs] : votes) {
      if (confs.size() == top) tied.push_back(label);
    }

    auto is_tied = [&](const std::string& label) { return std::find(tied.begin(), tied.end(), label) != tied.end(); };
    // Deterministic fallback: positive label if tied, else smallest label.
    auto fallback = [&]() -> std::string {
      if (cfg.positive_label && is_tied(*cfg.positive_label)) return *cfg.positive_label;
      return tied.front();
    };

    std::string winner;
    if (tied.size() == 1) {
      winner = tied.front();
    } else {
      switch (cfg.tie_break) {
        case TieBreak::kAnchorModel: {
          const auto& label = anchor->find(entry.id)->label;
          winner = is_tied(label) ? label : fallback();
          break;
        }
        case TieBreak::kPositiveLabel:
          winner = fallback();
          break;
        case TieBreak::kHighestMeanConfidence: {
          double best = -1.0;
          std::vector<std::string> leaders;
          for (const auto& label : tied) {
            auto confs = votes[label];
            std::sort(confs.begin(), confs.end());
            double sum = 0.0;
            for (double c : confs) sum += c;
            const double mean = sum / static_cast<double>(confs.size());
            if (mean > best) {
              best = mean;
              leaders = {label};
            } else if (mean == best) {
              leaders.push_back(label);
            }
          }
          tied = std::move(leaders);
          winner = tied.size() == 1 ? tied.front() : fallback();
          break;
        }
      }
    }
    out.add({entry.id, winner, static_cast<double>(votes[winner].size()) / n});
  }
  return out;
}

AgreementReport agreement_stats(std::span<const PredictionSet> sets) {
  check_coverage(sets);
  AgreementReport r;
  const std::size_t k = sets.size();
  for (const auto& s : sets) r.members.push_back(s.model_name());
  std::vector<std::vector<std::size_t>> agree(k, std::vector<std::size_t>(k, 0));

  std::vector<const Prediction*> row(k);
  for (const auto& entry : sets.front().entries()) {
    std::map<std::string, std::size_t> histogram;
    for (std::size_t i = 0; i < k; ++i) {
      row[i] = sets[i].find(entry.id);
      ++histogram[row[i]->label];
    }
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        if (row[i]->label == row[j]->label) ++agree[i][j];
      }
    }
    std::size_t top = 0, at_top = 0;
    for (const auto& [label, count] : histogram) {
      if (count > top) {
        top = count;
        at_top = 1;
      } else if (count == top) {
        ++at_top;
      }
    }
    if (histogram.size() == 1) ++r.unanimous;
    if (at_top > 1) ++r.ties;
    r.histograms.emplace_back(entry.id, std::move(histogram));
  }

  const std::size_t ids = sets.front().size();
  r.pairwise.assign(k, std::vector<double>(k, 1.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i != j && ids > 0) r.pairwise[i][j] = static_cast<double>(agree[i][j]) / static_cast<double>(ids);
    }
  }
  return r;
}

}  // namespace arvote
