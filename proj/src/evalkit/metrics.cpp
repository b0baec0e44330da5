#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "arvote/error.hpp"
#include "arvote/evalkit.hpp"

namespace arvote {

namespace {

void require_nonempty(const ConfusionMatrix& cm) {
  if (cm.n == 0) throw DataError("metric is undefined on an empty confusion matrix");
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix confusion(const Dataset& gold, const PredictionSet& pred) {
  ConfusionMatrix cm;
  cm.labelspace = gold.labelspace;

  std::vector<std::string> missing_pred;
  std::set<std::string> gold_ids;
  for (const auto& e : gold.examples) {
    gold_ids.insert(e.id);
    if (!pred.find(e.id)) missing_pred.push_back(e.id);
  }
  std::vector<std::string> extra_pred;
  for (const auto& p : pred.entries()) {
    if (!gold_ids.count(p.id)) extra_pred.push_back(p.id);
  }
  if (!missing_pred.empty() || !extra_pred.empty() || (gold.empty() && pred.empty())) {
    auto head = [](const std::vector<std::string>& ids) {
      const std::size_t shown = std::min<std::size_t>(ids.size(), 10);
      return fmt::format("{}{}", fmt::join(ids.begin(), ids.begin() + shown, ", "), ids.size() > shown ? ", ..." : "");
    };
    throw DataError(fmt::format("cannot join gold and predictions for '{}': {} gold id(s) without prediction [{}], "
                                "{} predicted id(s) not in gold [{}]",
                                pred.model_name(), missing_pred.size(), head(missing_pred), extra_pred.size(),
                                head(extra_pred)));
  }

  for (const auto& e : gold.examples) {
    if (!e.label) throw DataError(fmt::format("gold example '{}' has no label", e.id));
    const auto g = gold.labelspace.index_of(*e.label);
    const auto* p = pred.find(e.id);
    const auto k = gold.labelspace.index_of(p->label);
    if (!g) throw DataError(fmt::format("gold label '{}' is outside the label space", *e.label));
    if (!k) throw DataError(fmt::format("predicted label '{}' for '{}' is outside the label space", p->label, e.id));
    ++cm.counts[*g][*k];
    ++cm.n;
  }
  return cm;
}

std::vector<ClassScores> per_class_scores(const ConfusionMatrix& cm) {
  std::vector<ClassScores> out;
  for (std::size_t c = 0; c < 2; ++c) {
    const std::size_t tp = cm.counts[c][c];
    const std::size_t fn = cm.counts[c][1 - c];
    const std::size_t fp = cm.counts[1 - c][c];
    ClassScores s;
    s.label = cm.labelspace.label(c);
    s.precision = ratio(tp, tp + fp);
    s.recall = ratio(tp, tp + fn);
    s.f1 = ratio(2 * tp, 2 * tp + fp + fn);
    s.support = tp + fn;
    out.push_back(s);
  }
  return out;
}

double micro_f1(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    tp += cm.counts[c][c];
    fn += cm.counts[c][1 - c];
    fp += cm.counts[1 - c][c];
  }
  return ratio(2 * tp, 2 * tp + fp + fn);
}

double macro_f1(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  const auto scores = per_class_scores(cm);
  double sum = 0.0;
  for (const auto& s : scores) sum += s.f1;
  return sum / static_cast<double>(scores.size());
}

double accuracy(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  return ratio(cm.trace(), cm.n);
}

MetricReport metric_report(const ConfusionMatrix& cm, std::string model_name) {
  MetricReport r;
  r.model_name = std::move(model_name);
  r.micro_f1 = micro_f1(cm);
  r.macro_f1 = macro_f1(cm);
  r.accuracy = accuracy(cm);
  r.per_class = per_class_scores(cm);
  r.n = cm.n;
  return r;
}

std::vector<MetricReport> score_report(const Dataset& gold, std::span<const PredictionSet> preds) {
  std::vector<MetricReport> out;
  out.reserve(preds.size());
  for (const auto& p : preds) out.push_back(metric_report(confusion(gold, p), p.model_name()));
  return out;
}

}  // namespace arvote
